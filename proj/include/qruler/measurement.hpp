#pragma once

// Joint ion-ruler measurement in the local dipole basis.
//
// Each ion branch leaves the ruler in a product of displaced mode ground states,
// which in the reduced local coordinates (left edge eliminated) is a single
// multivariate Gaussian amplitude. Tracing every dipole except those at the two
// ion sites i1, i2 is a Gaussian integral, so each branch pair (m, m') of the
// reduced density matrix is an exact 4-variable Gaussian kernel over
// (phi_i1, phi_i2, phi'_i1, phi'_i2). The measurement projector pairs box windows
// with branches: the ket coordinates of the (m, m') term are integrated over the
// windows centred on branch m, the bra coordinates over those of branch m'.

#include "qruler/ion.hpp"
#include "qruler/lattice.hpp"

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <string>

namespace qruler {

/// psi(phi) = exp(log_norm - (phi - center)^T precision (phi - center)) over the N-1 reduced
/// coordinates. |psi|^2 integrates to 1 against sqrt(N) d^{N-1}phi.
struct GaussianAmplitude {
  int site = 0;  ///< ion site of the branch
  Eigen::MatrixXd precision;
  Eigen::VectorXd center;  ///< indexed by reduced offset
  double log_norm = 0.0;
  double log_jacobian = 0.0;  ///< log sqrt(N)
  /// exp(-i f) of the branch. Branch-global and independent of phi, so it only multiplies each
  /// density-matrix block by a unit complex number; magnitudes below never depend on it.
  std::complex<double> global_phase{1.0, 0.0};

  int dim() const { return static_cast<int>(center.size()); }
  double log_value(const Eigen::VectorXd& phi_reduced) const;
  double value(const Eigen::VectorXd& phi_reduced) const;
  /// Covariance of |psi|^2 in reduced coordinates, (4 A)^{-1}.
  Eigen::MatrixXd density_covariance() const;
};

/// Long-time branch amplitude for the ion localised at `site` (g = lambda_{alpha,site}).
GaussianAmplitude build_branch_amplitude(int site, const IonModel& model, const ModeBasis& basis);

/// K(y) = exp(log_prefactor - y^T quad y + linear^T y), y = (phi_i1, phi_i2, phi'_i1, phi'_i2).
/// Includes the 1/2 branch weight and the sqrt(N) Jacobian.
struct DoubledKernel {
  int ket_site = 0;
  int bra_site = 0;
  int i1 = 0;
  int i2 = 0;
  Eigen::Matrix4d quad = Eigen::Matrix4d::Zero();
  Eigen::Vector4d linear = Eigen::Vector4d::Zero();
  double log_prefactor = 0.0;
  // Completed-square form, used for evaluation: K(y) = exp(log_peak - (y-peak)^T quad (y-peak)).
  Eigen::Vector4d peak = Eigen::Vector4d::Zero();
  double log_peak = 0.0;
  std::complex<double> phase{1.0, 0.0};

  double log_value(const Eigen::Vector4d& y) const;
  double value(const Eigen::Vector4d& y) const;
  /// log of int K(a, a) da over the two kept coordinates (branch weight for m = m').
  double log_diagonal_trace() const;
  /// log of int K(y) d^4 y.
  double log_full_integral() const;
  /// Returns a copy with log prefactors shifted by `delta` (for normalisation-invariance checks).
  DoubledKernel scaled(double delta) const;
};

/// Partial trace over every reduced coordinate other than i1, i2; bra and ket share the traced
/// coordinates. Throws DomainError if i1 == i2 or either is the eliminated left edge.
DoubledKernel trace_to_doubled_kernel(const GaussianAmplitude& ket, const GaussianAmplitude& bra, int i1, int i2,
                                      const ModeBasis& basis);

/// Box windows [<phi_{i_l}>_m - c dphi_{i_l}, <phi_{i_l}>_m + c dphi_{i_l}].
struct BoxProjectorSpec {
  double c = 0.1;
  int i1 = 0;
  int i2 = 0;
  std::array<std::array<double, 2>, 2> centers{};  ///< [l][m], l = kept site (0 -> i1), m = branch
  std::array<double, 2> halfwidths{};               ///< c * dphi_{i_l}

  double lower(int l, int m) const { return centers[l][m] - halfwidths[l]; }
  double upper(int l, int m) const { return centers[l][m] + halfwidths[l]; }
};

BoxProjectorSpec make_box_spec(double c, int i1, int i2, const IonModel& model, const ModeBasis& basis,
                               int edge_margin = 2);

/// Branch whose windows the ket (unprimed) and bra (primed) coordinates are integrated over; 1 or 2.
struct Pairing {
  int ket_branch = 1;
  int bra_branch = 1;
};

struct BoxIntegral {
  double log_value = 0.0;
  int order = 0;              ///< Gauss-Legendre points per axis at convergence
  double rel_change = 0.0;    ///< last refinement change
  double value() const;
};

/// int over the 4-box of K(y) d^4y with tensor Gauss-Legendre, order raised until two successive
/// orders agree to 1e-8 relative.
BoxIntegral integrate_box(const DoubledKernel& kernel, const std::array<double, 4>& lower,
                          const std::array<double, 4>& upper);

/// <Psi*| block |Psi*> contribution: 1/2 * 1/(2c dphi_1 * 2c dphi_2) * box integral.
BoxIntegral project_box(const DoubledKernel& kernel, const BoxProjectorSpec& spec, Pairing pairing);

struct CStarResult {
  int i1 = 0;
  int i2 = 0;
  double c = 0.0;
  double cstar = 0.0;           ///< (t12 + t21) / (t11 + t22)
  double log_cstar = 0.0;
  double ratio = 0.0;           ///< |t12| / t11
  std::array<std::array<double, 2>, 2> log_terms{};  ///< log <Psi*|rho^{m m'}|Psi*>
  std::array<std::array<int, 2>, 2> orders{};
  double diagonal_mismatch = 0.0;     ///< |t11 - t22| / t11
  double offdiagonal_mismatch = 0.0;  ///< ||t12| - |t21|| / |t12|
  bool mirror_symmetric = false;      ///< i1 == -i2, where t11 == t22 holds exactly
  bool underflow = false;             ///< t11 below 1e-300; use log_cstar

  std::string to_json() const;
};

/// C* from four prebuilt kernels, indexed [m-1][m'-1].
CStarResult cstar_from_kernels(const std::array<std::array<DoubledKernel, 2>, 2>& kernels,
                               const BoxProjectorSpec& spec);

/// Joint measurement coherence for the ion superposition of sites i1 != i2, long-time regime.
/// Both sites must be kept coordinates at least `edge_margin` sites from the ruler ends.
CStarResult cstar(int i1, int i2, double c, const IonModel& model, const ModeBasis& basis, int edge_margin = 2);

}  // namespace qruler
