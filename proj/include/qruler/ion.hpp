#pragma once

// Tight-binding ion constants and ion-mode couplings.

#include "qruler/lattice.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace qruler {

struct IonPhysical {
  double ion_mass = 1.0;           ///< M_I
  double ion_charge = 1.0;         ///< q_I (magnitude)
  double dipole_charge = 1.0;      ///< q (magnitude)
  double dipole_separation = 0.01; ///< l
  double distance = 1.0;           ///< w, perpendicular ion-ruler distance
  double eps0 = 1.0;

  double dipole_moment() const { return dipole_charge * dipole_separation; }

  /// Throws ConfigError for nonpositive fields or l >= w.
  void validate() const;
};

/// Constants that exist only when the model is built from physical parameters.
struct IonConstants {
  double kappa = 0.0;   ///< inverse localisation length
  double nu = 0.0;      ///< on-site energy (< 0)
  double gamma = 0.0;   ///< nearest-neighbour hopping (< 0); not used in time evolution
  double xi = 0.0;      ///< xi(kappa w)
  double spacing = 0.0; ///< a_r used for gamma
  IonPhysical physical;
};

class IonModel {
 public:
  double lambda() const { return lambda_; }
  /// Dimensionless coupling lambda_{alpha,n} = lambda x0_alpha u_{alpha,n} / (hbar Omega_alpha).
  double coupling(int alpha, int n) const { return coupling_(alpha - 1, n + half_); }
  /// (N-1) x N, row alpha-1, column site offset.
  const Eigen::MatrixXd& couplings() const { return coupling_; }
  /// Column of couplings for one site, indexed alpha-1.
  Eigen::VectorXd site_couplings(int n) const { return coupling_.col(n + half_); }
  const std::optional<IonConstants>& constants() const { return constants_; }
  bool is_physical() const { return constants_.has_value(); }
  int size() const { return static_cast<int>(coupling_.cols()); }

  friend IonModel build_ion_model(const IonPhysical& phys, const ModeBasis& basis);
  friend IonModel build_dimensionless_model(const ModeBasis& basis, double lambda);

 private:
  double lambda_ = 0.0;
  int half_ = 0;
  Eigen::MatrixXd coupling_;
  std::optional<IonConstants> constants_;
};

/// xi(z) = int_0^inf exp(-2x) x (x^2 + z^2)^{-5/2} dx, relative error < 1e-8.
/// Throws RegimeError for z below 1e-3 where the integral blows up like 1/(3 z^3).
double xi(double z);

double kappa_of(const IonPhysical& phys, double hbar);

/// Physical route: kappa, nu, gamma and lambda = 3 q_I p_r w kappa^4 xi(kappa w) / (4 pi eps0).
/// a_r and hbar come from the basis configuration.
IonModel build_ion_model(const IonPhysical& phys, const ModeBasis& basis);

/// Units hbar = m_r = k_r = 1 style: lambda is given directly. Throws ConfigError for lambda < 0.
IonModel build_dimensionless_model(const ModeBasis& basis, double lambda);

enum class CheckStatus { pass, warn, fail, not_applicable };
const char* to_string(CheckStatus s);

struct RegimeCheck {
  std::string name;
  std::string condition;
  CheckStatus status = CheckStatus::not_applicable;
  double value = 0.0;
  double threshold = 0.0;
};

struct RegimeReport {
  std::vector<RegimeCheck> checks;
  bool any(CheckStatus s) const;
  std::string to_text() const;
  std::string to_json() const;
};

/// Checks the approximations behind the tight-binding and linear-coupling model.
/// Report only: never throws. Physical checks are marked not_applicable for dimensionless models.
RegimeReport validate_regime(const IonModel& model, const ModeBasis& basis);

}  // namespace qruler
