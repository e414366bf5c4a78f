#pragma once

// Exact ion-ruler dynamics for a single ion with the hopping terms dropped.
// Each ion branch drives every ruler mode into a coherent state whose amplitude
// follows from three time integrals F1, F2, F3 of the switching function.

#include "qruler/ion.hpp"
#include "qruler/lattice.hpp"

#include <complex>
#include <vector>

namespace qruler {

enum class SwitchKind { exponential, step };

/// S(t) = 1 - exp(-t/delta_t) for t > 0 (exponential), or the step function.
struct SwitchingProfile {
  SwitchKind kind = SwitchKind::exponential;
  double delta_t = 0.0;

  static SwitchingProfile exponential(double delta_t);
  static SwitchingProfile step();
  /// delta_t = factor / Omega_1.
  static SwitchingProfile slow(const ModeBasis& basis, double factor = 50.0);

  void validate() const;
  double operator()(double t) const;
};

struct FValues {
  double F1 = 0.0;
  double F2 = 0.0;
  double F3 = 0.0;
  bool has_F1 = false;
};

enum class FMethod {
  quadrature,  ///< full integrals by adaptive quadrature
  asymptotic,  ///< t > delta_t forms keeping the 1/(1 + Omega^2 delta_t^2) corrections
  long_time,   ///< delta_t >> 1/Omega_1: F2 = -lambda sin, F3 = lambda cos
};

/// Integrals of the switching function for unit coupling; F_k = lambda_{alpha,n} * F2, F3 of this
/// and F1 = lambda_{alpha,n}^2 * unit F1.
FValues unit_F(double Omega, double t, const SwitchingProfile& switching, bool with_F1);

/// Full evaluation by quadrature (relative tolerance 1e-8, absolute floor 1e-14).
FValues eval_F(int alpha, int n, double t, const SwitchingProfile& switching, const IonModel& model,
               const ModeBasis& basis, bool with_F1 = true);

/// F2, F3 valid for t > delta_t; F1 is not provided.
FValues eval_F_asymptotic(int alpha, int n, double t, const SwitchingProfile& switching, const IonModel& model,
                          const ModeBasis& basis);

FValues eval_F_long_time(int alpha, int n, double t, const IonModel& model, const ModeBasis& basis);

struct BranchState {
  int site = 0;
  double t = 0.0;
  std::vector<std::complex<double>> g;  ///< index alpha-1
  std::vector<double> f;                ///< F1 + F2 F3; empty unless phases were requested
};

/// g = (F3 - i F2) exp(-i Omega t) for every mode.
BranchState branch_state(int site, double t, const SwitchingProfile& switching, const IonModel& model,
                         const ModeBasis& basis, bool with_phases = false);

/// Ion coherence exp{-1/2 sum_alpha [dF3^2 + dF2^2]}. Sites must be at least two sites from the edges.
double coherence_t(int i1, int i2, double t, const SwitchingProfile& switching, const IonModel& model,
                   const ModeBasis& basis, FMethod method = FMethod::quadrature);

/// Long-time closed form written in terms of lambda, N, m_r and Omega_alpha directly.
double coherence_longtime(int i1, int i2, const IonModel& model, const ModeBasis& basis);

}  // namespace qruler
