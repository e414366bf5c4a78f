#include "qruler/lattice.hpp"

#include "qruler/csv.hpp"
#include "qruler/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

namespace qruler {

double RulerConfig::mass() const {
  return std::pow(static_cast<double>(n_dipoles), scaling_exponent) * mass0;
}

double RulerConfig::stiffness() const {
  return std::pow(static_cast<double>(n_dipoles), scaling_exponent) * stiffness0;
}

void RulerConfig::validate() const {
  if (n_dipoles < 3 || n_dipoles % 2 == 0)
    throw ConfigError("dipole count N must be odd and >= 3, got " + std::to_string(n_dipoles));
  if (!(mass0 > 0.0)) throw ConfigError("mass m_r0 must be positive");
  if (!(stiffness0 > 0.0)) throw ConfigError("stiffness k_r0 must be positive");
  if (!(spacing > 0.0)) throw ConfigError("lattice spacing a_r must be positive");
  if (!(scaling_exponent >= 0.0)) throw ConfigError("scaling exponent s must be >= 0");
  if (!(hbar > 0.0)) throw ConfigError("hbar must be positive");
  if (!(mass() > 0.0) || !(stiffness() > 0.0) || !std::isfinite(mass()) || !std::isfinite(stiffness()))
    throw ConfigError("effective mass and stiffness must be finite and positive");
}

ModeBasis build_mode_basis(const RulerConfig& cfg) {
  cfg.validate();
  const int N = cfg.n_dipoles;
  const int modes = N - 1;
  const double m = cfg.mass();
  const double pi = std::numbers::pi;

  ModeBasis b;
  b.config_ = cfg;
  b.omega_r_ = std::sqrt(cfg.stiffness() / m);
  b.Omega_.resize(modes);
  b.x0_.resize(modes);
  b.u_.resize(modes, N);
  b.u_tilde_.resize(modes, modes);

  const double norm = std::sqrt(2.0 / N);
  for (int alpha = 1; alpha <= modes; ++alpha) {
    const double Om = 2.0 * b.omega_r_ * std::sin(alpha * pi / (2.0 * N));
    b.Omega_[alpha - 1] = Om;
    b.x0_[alpha - 1] = std::sqrt(cfg.hbar / (2.0 * m * Om));
    for (int off = 0; off < N; ++off) {
      // n + N/2 = offset + 1/2
      b.u_(alpha - 1, off) = norm * std::cos(alpha * pi * (off + 0.5) / N);
    }
    const double edge = b.u_(alpha - 1, 0);
    for (int r = 0; r < modes; ++r) b.u_tilde_(alpha - 1, r) = b.u_(alpha - 1, r + 1) - edge;
  }
  return b;
}

double ModeBasis::zero_point_sigma(int n) const {
  const int off = site_offset(n);
  return std::sqrt((u_.col(off).array() * x0_.array()).square().sum());
}

Eigen::VectorXd local_from_modes(const ModeBasis& basis, const Eigen::VectorXd& x) {
  if (x.size() != basis.mode_count())
    throw DomainError("mode vector must have length N-1 = " + std::to_string(basis.mode_count()));
  return basis.u_matrix().transpose() * x;
}

Eigen::VectorXd modes_from_local(const ModeBasis& basis, const Eigen::VectorXd& phi_reduced) {
  if (phi_reduced.size() != basis.mode_count())
    throw DomainError("reduced local vector must have length N-1 = " + std::to_string(basis.mode_count()));
  return basis.u_tilde_matrix() * phi_reduced;
}

Eigen::VectorXd complete_with_constraint(const ModeBasis& basis, const Eigen::VectorXd& phi_reduced) {
  if (phi_reduced.size() != basis.mode_count())
    throw DomainError("reduced local vector must have length N-1 = " + std::to_string(basis.mode_count()));
  Eigen::VectorXd full(basis.size());
  full[0] = -phi_reduced.sum();
  full.tail(basis.mode_count()) = phi_reduced;
  return full;
}

double eom_residual(double omega_r, const Eigen::VectorXd& Omega, const Eigen::MatrixXd& u) {
  const Eigen::Index N = u.cols();
  const double w2 = omega_r * omega_r;
  double worst = 0.0;
  for (Eigen::Index a = 0; a < u.rows(); ++a) {
    const double lhs_scale = -Omega[a] * Omega[a];
    for (Eigen::Index j = 0; j < N; ++j) {
      double lap;
      if (j == 0) {
        lap = -(u(a, 0) - u(a, 1));
      } else if (j == N - 1) {
        lap = -(u(a, N - 1) - u(a, N - 2));
      } else {
        lap = u(a, j - 1) - 2.0 * u(a, j) + u(a, j + 1);
      }
      worst = std::max(worst, std::abs(lhs_scale * u(a, j) - w2 * lap));
    }
  }
  return worst;
}

double check_discrete_eom(const ModeBasis& basis) {
  return eom_residual(basis.omega_r(), basis.Omegas(), basis.u_matrix());
}

void require_edge_safe(const ModeBasis& basis, int n, int margin) {
  if (std::abs(n) > basis.half() - margin)
    throw DomainError("site " + std::to_string(n) + " is within " + std::to_string(margin) +
                      " sites of a ruler edge (N=" + std::to_string(basis.size()) + ")");
}

void write_mode_table(std::ostream& os, const ModeBasis& basis) {
  os << "alpha,n,u,omega\n";
  for (int alpha = 1; alpha <= basis.mode_count(); ++alpha) {
    for (int n = -basis.half(); n <= basis.half(); ++n) {
      os << alpha << ',' << n << ',' << format_number(basis.u(alpha, n)) << ','
         << format_number(basis.Omega(alpha)) << '\n';
    }
  }
}

}  // namespace qruler
