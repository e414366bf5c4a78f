#include "qruler/dynamics.hpp"

#include "qruler/csv.hpp"
#include "qruler/error.hpp"
#include "qruler/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace qruler {

namespace {

constexpr double kRelTol = 1e-8;
constexpr double kAbsFloor = 1e-14;
constexpr double kPanel = std::numbers::pi;

// Dimensionless switching factor in the integration variable tau = Omega t; b = Omega delta_t.
double switch_factor(double tau, double b, SwitchKind kind) {
  if (kind == SwitchKind::step) return 1.0;
  return -std::expm1(-tau / b);
}

// int_0^tau s(tau') cos(tau') dtau' in closed form.
double inner_cos_integral(double tau, double b, SwitchKind kind) {
  if (kind == SwitchKind::step) return std::sin(tau);
  const double k = b * b / (1.0 + b * b);
  return std::sin(tau) - k * (std::exp(-tau / b) * (std::sin(tau) - std::cos(tau) / b) + 1.0 / b);
}

double b_of(double Omega, const SwitchingProfile& s) {
  return s.kind == SwitchKind::step ? 0.0 : Omega * s.delta_t;
}

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("time must be finite and >= 0, got " + format_number(t));
}

void require_mode(const ModeBasis& basis, int alpha) {
  if (alpha < 1 || alpha > basis.mode_count())
    throw DomainError("mode index must lie in 1..N-1, got " + std::to_string(alpha));
}

void require_site(const ModeBasis& basis, int n) {
  if (!basis.is_site(n)) throw DomainError("site " + std::to_string(n) + " is not on the ruler");
}

}  // namespace

SwitchingProfile SwitchingProfile::exponential(double delta_t) {
  SwitchingProfile s{SwitchKind::exponential, delta_t};
  s.validate();
  return s;
}

SwitchingProfile SwitchingProfile::step() { return {SwitchKind::step, 0.0}; }

SwitchingProfile SwitchingProfile::slow(const ModeBasis& basis, double factor) {
  return exponential(factor / basis.Omega(1));
}

void SwitchingProfile::validate() const {
  if (kind == SwitchKind::exponential && (!(delta_t > 0.0) || !std::isfinite(delta_t)))
    throw ConfigError("exponential switching needs delta_t > 0, got " + format_number(delta_t));
}

double SwitchingProfile::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  return kind == SwitchKind::step ? 1.0 : -std::expm1(-t / delta_t);
}

FValues unit_F(double Omega, double t, const SwitchingProfile& switching, bool with_F1) {
  switching.validate();
  require_time(t);
  FValues out;
  out.has_F1 = with_F1;
  if (t == 0.0) return out;

  const double T = Omega * t;
  const double b = b_of(Omega, switching);
  const SwitchKind kind = switching.kind;

  const auto c = quad::adaptive_panels([&](double tau) { return switch_factor(tau, b, kind) * std::cos(tau); }, 0.0,
                                       T, kPanel, kRelTol, kAbsFloor, "F2");
  const auto s = quad::adaptive_panels([&](double tau) { return switch_factor(tau, b, kind) * std::sin(tau); }, 0.0,
                                       T, kPanel, kRelTol, kAbsFloor, "F3");
  out.F2 = -c.value;
  out.F3 = -s.value;
  if (with_F1) {
    const auto d = quad::adaptive_panels(
        [&](double tau) { return switch_factor(tau, b, kind) * std::sin(tau) * inner_cos_integral(tau, b, kind); },
        0.0, T, kPanel, kRelTol, kAbsFloor, "F1");
    out.F1 = -2.0 * d.value;
  }
  return out;
}

FValues eval_F(int alpha, int n, double t, const SwitchingProfile& switching, const IonModel& model,
               const ModeBasis& basis, bool with_F1) {
  require_mode(basis, alpha);
  require_site(basis, n);
  const double lam = model.coupling(alpha, n);
  if (lam == 0.0) {
    require_time(t);
    return FValues{0.0, 0.0, 0.0, with_F1};
  }
  FValues unit = unit_F(basis.Omega(alpha), t, switching, with_F1);
  return FValues{lam * lam * unit.F1, lam * unit.F2, lam * unit.F3, with_F1};
}

FValues eval_F_asymptotic(int alpha, int n, double t, const SwitchingProfile& switching, const IonModel& model,
                          const ModeBasis& basis) {
  require_mode(basis, alpha);
  require_site(basis, n);
  switching.validate();
  require_time(t);
  const double Om = basis.Omega(alpha);
  const double lam = model.coupling(alpha, n);
  const double b = b_of(Om, switching);
  const double T = Om * t;
  FValues out;
  out.F2 = -lam * (std::sin(T) - b / (1.0 + b * b));
  out.F3 = lam * (std::cos(T) - 1.0 / (1.0 + b * b));
  return out;
}

FValues eval_F_long_time(int alpha, int n, double t, const IonModel& model, const ModeBasis& basis) {
  require_mode(basis, alpha);
  require_site(basis, n);
  require_time(t);
  const double T = basis.Omega(alpha) * t;
  const double lam = model.coupling(alpha, n);
  FValues out;
  out.F2 = -lam * std::sin(T);
  out.F3 = lam * std::cos(T);
  return out;
}

BranchState branch_state(int site, double t, const SwitchingProfile& switching, const IonModel& model,
                         const ModeBasis& basis, bool with_phases) {
  require_site(basis, site);
  BranchState state;
  state.site = site;
  state.t = t;
  state.g.resize(basis.mode_count());
  if (with_phases) state.f.resize(basis.mode_count());
  for (int alpha = 1; alpha <= basis.mode_count(); ++alpha) {
    const FValues F = eval_F(alpha, site, t, switching, model, basis, with_phases);
    const double T = basis.Omega(alpha) * t;
    state.g[alpha - 1] = std::complex<double>(F.F3, -F.F2) * std::polar(1.0, -T);
    if (with_phases) state.f[alpha - 1] = F.F1 + F.F2 * F.F3;
  }
  return state;
}

double coherence_t(int i1, int i2, double t, const SwitchingProfile& switching, const IonModel& model,
                   const ModeBasis& basis, FMethod method) {
  require_edge_safe(basis, i1);
  require_edge_safe(basis, i2);
  switching.validate();
  require_time(t);
  if (i1 == i2) return 1.0;
  double exponent = 0.0;
  for (int alpha = 1; alpha <= basis.mode_count(); ++alpha) {
    const double d = model.coupling(alpha, i1) - model.coupling(alpha, i2);
    if (d == 0.0) continue;
    const double Om = basis.Omega(alpha);
    const double T = Om * t;
    double F2 = 0.0, F3 = 0.0;
    switch (method) {
      case FMethod::quadrature: {
        const FValues unit = unit_F(Om, t, switching, false);
        F2 = unit.F2;
        F3 = unit.F3;
        break;
      }
      case FMethod::asymptotic: {
        const double b = b_of(Om, switching);
        F2 = -(std::sin(T) - b / (1.0 + b * b));
        F3 = std::cos(T) - 1.0 / (1.0 + b * b);
        break;
      }
      case FMethod::long_time:
        F2 = -std::sin(T);
        F3 = std::cos(T);
        break;
    }
    exponent += d * d * (F2 * F2 + F3 * F3);
  }
  return std::exp(-0.5 * exponent);
}

double coherence_longtime(int i1, int i2, const IonModel& model, const ModeBasis& basis) {
  require_edge_safe(basis, i1);
  require_edge_safe(basis, i2);
  const auto& cfg = basis.config();
  const double N = cfg.n_dipoles;
  const double lam = model.lambda();
  const double pi = std::numbers::pi;
  double exponent = 0.0;
  for (int alpha = 1; alpha <= basis.mode_count(); ++alpha) {
    const double Om = basis.Omega(alpha);
    const double diff = std::cos(alpha * pi * (i1 + N / 2.0) / N) - std::cos(alpha * pi * (i2 + N / 2.0) / N);
    exponent += lam * lam / (2.0 * cfg.hbar * N * cfg.mass() * Om * Om * Om) * diff * diff;
  }
  return std::exp(-exponent);
}

}  // namespace qruler
