#pragma once

// Free-ruler normal modes of an open chain of N dipoles with nearest-neighbour
// springs. The centre-of-mass (zero-frequency) mode is never represented, so
// every displacement field built from the modes satisfies sum_n phi_n = 0.
//
// Sites carry symmetric labels n = -(N-1)/2 ... (N-1)/2 and modes are labelled
// alpha = 1 ... N-1. Reduced local coordinates drop the left-edge site, whose
// displacement is fixed by the constraint.

#include <Eigen/Dense>

#include <iosfwd>

namespace qruler {

struct RulerConfig {
  int n_dipoles = 41;
  double mass0 = 1.0;       ///< m_r0; the effective mass is N^s * m_r0
  double stiffness0 = 1.0;  ///< k_r0; the effective stiffness is N^s * k_r0
  double spacing = 1.0;     ///< equilibrium lattice spacing a_r
  double scaling_exponent = 0.0;
  double hbar = 1.0;

  double mass() const;
  double stiffness() const;
  int half() const { return (n_dipoles - 1) / 2; }

  /// Throws ConfigError if N is even or < 3, or if any physical scale is not positive.
  void validate() const;
};

class ModeBasis {
 public:
  const RulerConfig& config() const { return config_; }
  int size() const { return config_.n_dipoles; }
  int mode_count() const { return config_.n_dipoles - 1; }
  int half() const { return config_.half(); }
  int left_edge() const { return -half(); }
  int right_edge() const { return half(); }

  double omega_r() const { return omega_r_; }
  double Omega(int alpha) const { return Omega_[alpha - 1]; }
  double x0(int alpha) const { return x0_[alpha - 1]; }
  double u(int alpha, int n) const { return u_(alpha - 1, site_offset(n)); }
  /// u_{alpha,n} - u_{alpha,left edge}; defined for every kept (non left-edge) site.
  double u_tilde(int alpha, int n) const { return u_tilde_(alpha - 1, reduced_offset(n)); }

  const Eigen::VectorXd& Omegas() const { return Omega_; }
  const Eigen::VectorXd& x0s() const { return x0_; }
  /// (N-1) x N, row alpha-1, column site_offset(n).
  const Eigen::MatrixXd& u_matrix() const { return u_; }
  /// (N-1) x (N-1), row alpha-1, column reduced_offset(n).
  const Eigen::MatrixXd& u_tilde_matrix() const { return u_tilde_; }

  bool is_site(int n) const { return n >= -half() && n <= half(); }
  bool is_kept(int n) const { return n > -half() && n <= half(); }
  int site_offset(int n) const { return n + half(); }
  int reduced_offset(int n) const { return n + half() - 1; }
  int site_label(int offset) const { return offset - half(); }
  int reduced_label(int offset) const { return offset - half() + 1; }

  /// Free-ruler zero-point displacement width sqrt(sum_alpha u_{alpha,n}^2 x0_alpha^2).
  double zero_point_sigma(int n) const;

  friend ModeBasis build_mode_basis(const RulerConfig& cfg);

 private:
  RulerConfig config_;
  double omega_r_ = 0.0;
  Eigen::VectorXd Omega_;
  Eigen::VectorXd x0_;
  Eigen::MatrixXd u_;
  Eigen::MatrixXd u_tilde_;
};

ModeBasis build_mode_basis(const RulerConfig& cfg);

/// phi_n = sum_alpha u_{alpha,n} x_alpha for all N sites (indexed by site offset).
Eigen::VectorXd local_from_modes(const ModeBasis& basis, const Eigen::VectorXd& x);

/// x_alpha = sum_n u~_{alpha,n} phi_n over the N-1 kept sites (indexed by reduced offset).
Eigen::VectorXd modes_from_local(const ModeBasis& basis, const Eigen::VectorXd& phi_reduced);

/// Restores the left-edge displacement from the constraint and returns all N sites.
Eigen::VectorXd complete_with_constraint(const ModeBasis& basis, const Eigen::VectorXd& phi_reduced);

/// Max residual of -Omega^2 u = omega_r^2 (discrete Laplacian with free ends) u over all modes and sites.
double eom_residual(double omega_r, const Eigen::VectorXd& Omega, const Eigen::MatrixXd& u);
double check_discrete_eom(const ModeBasis& basis);

/// Throws DomainError unless |n| <= (N-1)/2 - margin.
void require_edge_safe(const ModeBasis& basis, int n, int margin = 2);

/// CSV with columns alpha,n,u,omega.
void write_mode_table(std::ostream& os, const ModeBasis& basis);

}  // namespace qruler
