#pragma once

// Thin wrappers over Boost.Math quadrature with the tolerances this project uses.

#include <functional>
#include <span>
#include <vector>

namespace qruler::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;  ///< estimated absolute error
  double l1 = 0.0;     ///< integral of |f|
};

/// Adaptive Gauss-Kronrod (7/15) on [a, b]. Converged when error <= rel_tol * L1 + abs_floor;
/// otherwise throws NumericalError naming `what`.
Result adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-8,
                double abs_floor = 1e-14, const char* what = "integral");

/// Splits [a, b] into panels no wider than `panel` and integrates each adaptively.
/// Used for oscillatory integrands spanning many periods.
Result adaptive_panels(const std::function<double(double)>& f, double a, double b, double panel,
                       double rel_tol = 1e-8, double abs_floor = 1e-14, const char* what = "integral");

struct Rule {
  std::vector<double> nodes;    ///< on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre rule of the given order; cached, thread-safe.
const Rule& gauss_legendre(int order);

}  // namespace qruler::quad
