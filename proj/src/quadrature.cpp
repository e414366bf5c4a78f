#include "qruler/quadrature.hpp"

#include "qruler/error.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace qruler::quad {

namespace {

constexpr unsigned kMaxDepth = 20;

}  // namespace

Result adaptive(const std::function<double(double)>& f, double a, double b, double rel_tol, double abs_floor,
                const char* what) {
  Result r;
  if (a == b) return r;
  r.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, kMaxDepth, rel_tol, &r.error,
                                                                          &r.l1);
  if (!std::isfinite(r.value) || r.error > rel_tol * r.l1 + abs_floor) {
    std::ostringstream msg;
    msg << what << ": adaptive quadrature did not converge on [" << a << ", " << b << "]: value=" << r.value
        << " error=" << r.error << " L1=" << r.l1 << " rel_tol=" << rel_tol;
    throw NumericalError(msg.str());
  }
  return r;
}

Result adaptive_panels(const std::function<double(double)>& f, double a, double b, double panel, double rel_tol,
                       double abs_floor, const char* what) {
  Result total;
  if (a == b) return total;
  const double width = b - a;
  const auto count = static_cast<long>(std::max(1.0, std::ceil(std::abs(width) / panel)));
  const double h = width / static_cast<double>(count);
  for (long k = 0; k < count; ++k) {
    const double lo = a + h * static_cast<double>(k);
    const double hi = (k + 1 == count) ? b : lo + h;
    double err = 0.0, l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, kMaxDepth, rel_tol,
                                                                                  &err, &l1);
    total.value += v;
    total.error += err;
    total.l1 += l1;
  }
  if (!std::isfinite(total.value) || total.error > rel_tol * total.l1 + abs_floor * static_cast<double>(count)) {
    std::ostringstream msg;
    msg << what << ": panel quadrature did not converge on [" << a << ", " << b << "] with " << count
        << " panels: value=" << total.value << " error=" << total.error << " L1=" << total.l1;
    throw NumericalError(msg.str());
  }
  return total;
}

const Rule& gauss_legendre(int order) {
  if (order < 1) throw DomainError("Gauss-Legendre order must be >= 1");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<Rule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[order];
  if (!slot) {
    auto rule = std::make_unique<Rule>();
    // legendre_p_zeros returns the non-negative roots in ascending order.
    const std::vector<double> roots = boost::math::legendre_p_zeros<double>(order);
    auto weight = [order](double x) {
      const double dp = boost::math::legendre_p_prime<double>(order, x);
      return 2.0 / ((1.0 - x * x) * dp * dp);
    };
    for (auto it = roots.rbegin(); it != roots.rend(); ++it) {
      if (*it == 0.0) continue;
      rule->nodes.push_back(-*it);
      rule->weights.push_back(weight(*it));
    }
    if (order % 2 == 1) {
      rule->nodes.push_back(0.0);
      rule->weights.push_back(weight(0.0));
    }
    for (double x : roots) {
      if (x == 0.0) continue;
      rule->nodes.push_back(x);
      rule->weights.push_back(weight(x));
    }
    slot = std::move(rule);
  }
  return *slot;
}

}  // namespace qruler::quad
