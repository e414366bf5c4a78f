#include "qruler/ion.hpp"

#include "qruler/csv.hpp"
#include "qruler/error.hpp"
#include "qruler/quadrature.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace qruler {

namespace {

constexpr double kXiMinArgument = 1e-3;
constexpr double kXiUpper = 40.0;  // exp(-80) tail is far below the tolerance
constexpr double kHoppingRatioLimit = 0.05;
constexpr double kSmallnessLimit = 0.1;

}  // namespace

void IonPhysical::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive and finite");
  };
  positive(ion_mass, "ion mass M_I");
  positive(ion_charge, "ion charge q_I");
  positive(dipole_charge, "dipole charge q");
  positive(dipole_separation, "dipole separation l");
  positive(distance, "ion-ruler distance w");
  positive(eps0, "eps0");
  if (dipole_separation >= distance)
    throw ConfigError("dipole separation l must be smaller than the ion-ruler distance w (dipole expansion)");
}

double xi(double z) {
  if (!(z >= kXiMinArgument) || !std::isfinite(z))
    throw RegimeError("xi(kappa w) diverges as kappa w -> 0; got kappa w = " + format_number(z));
  auto f = [z](double x) { return std::exp(-2.0 * x) * x * std::pow(x * x + z * z, -2.5); };
  // Integrand peaks near x = z/2; split there so the first bisection lands on the feature.
  const double split = std::min(z, kXiUpper / 2.0);
  const auto lo = quad::adaptive(f, 0.0, split, 1e-10, 0.0, "xi");
  const auto hi = quad::adaptive(f, split, kXiUpper, 1e-10, 0.0, "xi");
  return lo.value + hi.value;
}

double kappa_of(const IonPhysical& phys, double hbar) {
  return phys.ion_mass * phys.ion_charge * phys.dipole_moment() /
         (2.0 * std::numbers::pi * hbar * hbar * phys.eps0 * phys.distance);
}

namespace {

Eigen::MatrixXd mode_couplings(const ModeBasis& basis, double lambda) {
  const double hbar = basis.config().hbar;
  Eigen::MatrixXd c(basis.mode_count(), basis.size());
  for (int a = 0; a < basis.mode_count(); ++a) {
    const double scale = lambda * basis.x0s()[a] / (hbar * basis.Omegas()[a]);
    c.row(a) = scale * basis.u_matrix().row(a);
  }
  return c;
}

}  // namespace

IonModel build_ion_model(const IonPhysical& phys, const ModeBasis& basis) {
  phys.validate();
  const double hbar = basis.config().hbar;
  const double a_r = basis.config().spacing;
  IonConstants k;
  k.physical = phys;
  k.spacing = a_r;
  k.kappa = kappa_of(phys, hbar);
  k.nu = -hbar * hbar * k.kappa * k.kappa / (2.0 * phys.ion_mass);
  k.gamma = -(hbar * hbar * k.kappa * k.kappa / phys.ion_mass) * std::exp(-k.kappa * a_r) * (k.kappa * a_r + 1.0);
  k.xi = xi(k.kappa * phys.distance);

  IonModel model;
  model.lambda_ = 3.0 * phys.ion_charge * phys.dipole_moment() * phys.distance * std::pow(k.kappa, 4) * k.xi /
                  (4.0 * std::numbers::pi * phys.eps0);
  model.half_ = basis.half();
  model.coupling_ = mode_couplings(basis, model.lambda_);
  model.constants_ = k;
  return model;
}

IonModel build_dimensionless_model(const ModeBasis& basis, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ConfigError("coupling lambda must be finite and >= 0, got " + format_number(lambda));
  IonModel model;
  model.lambda_ = lambda;
  model.half_ = basis.half();
  model.coupling_ = mode_couplings(basis, lambda);
  return model;
}

const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::warn: return "warn";
    case CheckStatus::fail: return "fail";
    case CheckStatus::not_applicable: return "not applicable";
  }
  return "?";
}

bool RegimeReport::any(CheckStatus s) const {
  return std::any_of(checks.begin(), checks.end(), [s](const RegimeCheck& c) { return c.status == s; });
}

std::string RegimeReport::to_text() const {
  std::ostringstream os;
  os << std::left << std::setw(22) << "check" << std::setw(16) << "status" << std::setw(16) << "value"
     << std::setw(12) << "threshold" << "condition\n";
  for (const auto& c : checks) {
    const bool na = c.status == CheckStatus::not_applicable;
    os << std::left << std::setw(22) << c.name << std::setw(16) << to_string(c.status) << std::setw(16)
       << (na ? std::string("-") : format_number(c.value)) << std::setw(12) << format_number(c.threshold)
       << c.condition << '\n';
  }
  return os.str();
}

std::string RegimeReport::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : checks) {
    nlohmann::json e{{"name", c.name}, {"condition", c.condition}, {"status", to_string(c.status)},
                     {"threshold", c.threshold}};
    if (c.status == CheckStatus::not_applicable)
      e["value"] = nullptr;
    else
      e["value"] = c.value;
    j.push_back(std::move(e));
  }
  return nlohmann::json{{"checks", j}}.dump(2);
}

RegimeReport validate_regime(const IonModel& model, const ModeBasis& basis) {
  RegimeReport report;
  report.checks.reserve(6);
  auto add = [&](std::string name, std::string cond, double threshold) -> RegimeCheck& {
    report.checks.push_back({std::move(name), std::move(cond), CheckStatus::not_applicable, 0.0, threshold});
    return report.checks.back();
  };
  auto& localisation = add("localisation", "kappa a_r > 1", 1.0);
  auto& spread = add("ion_spread", "1/(sqrt2 kappa) / a_r < 1", 1.0);
  auto& hopping = add("hopping_ratio", "|gamma/nu| < 0.05", kHoppingRatioLimit);
  auto& proximity = add("discreteness", "w / a_r <= 1", 1.0);
  auto& dipole = add("dipole_size", "l / w < 0.1", kSmallnessLimit);
  auto& fluctuation = add("zero_point_motion", "max_n dphi_n / w < 0.1", kSmallnessLimit);

  const auto& k = model.constants();
  if (!k) return report;

  const double a_r = k->spacing;
  const double w = k->physical.distance;

  localisation.value = k->kappa * a_r;
  localisation.status = localisation.value > 1.0 ? CheckStatus::pass : CheckStatus::fail;

  spread.value = 1.0 / (std::numbers::sqrt2 * k->kappa * a_r);
  spread.status = spread.value < 1.0 ? CheckStatus::pass : CheckStatus::fail;

  hopping.value = std::abs(k->gamma / k->nu);
  hopping.status = hopping.value < kHoppingRatioLimit ? CheckStatus::pass : CheckStatus::warn;

  proximity.value = w / a_r;
  proximity.status = proximity.value <= 1.0 ? CheckStatus::pass : CheckStatus::warn;

  dipole.value = k->physical.dipole_separation / w;
  dipole.status = dipole.value < kSmallnessLimit ? CheckStatus::pass : CheckStatus::warn;

  double widest = 0.0;
  for (int n = -basis.half(); n <= basis.half(); ++n) widest = std::max(widest, basis.zero_point_sigma(n));
  fluctuation.value = widest / w;
  fluctuation.status = fluctuation.value < kSmallnessLimit ? CheckStatus::pass : CheckStatus::warn;

  return report;
}

}  // namespace qruler
