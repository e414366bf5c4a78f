#pragma once

// Brute-force reference implementations for small rulers (N <= 7).
//
// Nothing here reuses the main-path linear algebra: mode tables come from closed
// forms or a dense eigensolver, branch amplitudes are evaluated as explicit
// products of displaced mode ground states, traced integrals use dense tensor
// Gauss-Legendre grids, and measurement/response statistics use seeded Monte Carlo.

#include "qruler/ion.hpp"
#include "qruler/lattice.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>

namespace qruler::oracle {

inline constexpr int kMaxN = 7;

/// Spectrum and profiles of the free-chain stiffness matrix with the zero mode removed, sorted by
/// frequency; profile signs fixed so that the left-edge entry is positive.
struct DenseModes {
  Eigen::VectorXd Omega;  ///< N-1
  Eigen::MatrixXd u;      ///< (N-1) x N
};
DenseModes dense_modes(int n_dipoles, double mass, double stiffness);

/// xi(z) by composite Simpson on [0, upper] with `intervals` subintervals.
double xi_simpson(double z, int intervals = 10000, double upper = 40.0);

/// Closed-form F3 for unit coupling and exponential switching, b = Omega delta_t.
double unit_F3_closed(double Omega, double t, double b);
/// Closed-form F2 for unit coupling and exponential switching.
double unit_F2_closed(double Omega, double t, double b);

/// Explicit per-mode Gaussian for the ion at one site: x_alpha centred at 2 lambda_{alpha,i} x0_alpha.
struct DenseBranch {
  int n_dipoles = 0;
  int site = 0;
  Eigen::VectorXd x0;      ///< mode widths
  Eigen::VectorXd center;  ///< mode centres
  Eigen::MatrixXd u;       ///< (N-1) x N closed-form profiles

  /// Product over modes of (2 pi x0^2)^{-1/4} exp(-(x - centre)^2 / (4 x0^2)), with x_alpha built
  /// from all N site coordinates (the constraint-completed vector).
  double amplitude(const Eigen::VectorXd& phi_all) const;
  /// Same, from reduced coordinates (left edge dropped).
  double amplitude_reduced(const Eigen::VectorXd& phi_reduced) const;
  /// Branch mean of phi_n for every site.
  Eigen::VectorXd site_means() const;
  /// Free zero-point covariance of the N site coordinates.
  Eigen::MatrixXd site_covariance() const;
};

/// Built from the configuration and lambda only; the basis and model objects are not consulted
/// beyond their scalar parameters.
DenseBranch make_branch(int site, const IonModel& model, const ModeBasis& basis);

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t seed = 0;
  std::int64_t samples = 0;
};

/// One density-matrix element 1/2 * sqrt(N) * int dv psi_m(a, v) psi_m'(a', v), u4 = (a, a'),
/// a = (phi_i1, phi_i2). Composite Gauss-Legendre over the N-3 traced kept coordinates.
double kernel_value(int ket_site, int bra_site, int i1, int i2, const std::array<double, 4>& u4,
                    const IonModel& model, const ModeBasis& basis, int panels = 8, int points = 8);

/// C* = (t12 + t21) / (t11 + t22) by importance-sampled Monte Carlo over the traced coordinates,
/// with the four box windows sampled uniformly. Standard error by the delta method.
Estimate cstar(int i1, int i2, double c, const IonModel& model, const ModeBasis& basis, std::int64_t samples,
               std::uint64_t seed, int threads = 1);

struct ResponseEstimate {
  Eigen::VectorXd mean;
  Eigen::VectorXd mean_se;
  Eigen::VectorXd sigma;
  Eigen::VectorXd sigma_se;
  std::uint64_t seed = 0;
  std::int64_t samples = 0;
};

/// Samples |Psi|^2 for the ion at i1 (i2 == i1) or the equal superposition of i1 and i2.
ResponseEstimate response(int i1, int i2, const IonModel& model, const ModeBasis& basis, std::int64_t samples,
                          std::uint64_t seed);

/// Normalisation of sqrt(N) |psi|^2 over the reduced coordinates on a dense grid (+-6 sigma per axis).
double branch_normalisation(const DenseBranch& branch, int points_per_axis = 24);

}  // namespace qruler::oracle
