#include "qruler/measurement.hpp"

#include "qruler/csv.hpp"
#include "qruler/error.hpp"
#include "qruler/quadrature.hpp"
#include "qruler/response.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace qruler {

namespace {

constexpr double kBoxRelTol = 1e-8;
constexpr double kCheckRelTol = 1e-8;
constexpr double kUnderflow = 1e-300;
constexpr std::array<int, 10> kBoxOrders{4, 6, 8, 12, 16, 24, 32, 48, 64, 96};

double log_add(double a, double b) {
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

template <typename Llt>
Llt factor_or_throw(const Eigen::MatrixXd& m, const char* what) {
  Llt llt(m);
  if (llt.info() != Eigen::Success) throw NumericalError(std::string(what) + " is not positive definite");
  return llt;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

double GaussianAmplitude::log_value(const Eigen::VectorXd& phi) const {
  if (phi.size() != center.size()) throw DomainError("amplitude argument has the wrong dimension");
  const Eigen::VectorXd d = phi - center;
  return log_norm - d.dot(precision * d);
}

double GaussianAmplitude::value(const Eigen::VectorXd& phi) const { return std::exp(log_value(phi)); }

Eigen::MatrixXd GaussianAmplitude::density_covariance() const {
  const auto llt = factor_or_throw<Eigen::LLT<Eigen::MatrixXd>>(4.0 * precision, "amplitude precision");
  return llt.solve(Eigen::MatrixXd::Identity(dim(), dim()));
}

GaussianAmplitude build_branch_amplitude(int site, const IonModel& model, const ModeBasis& basis) {
  if (!basis.is_site(site)) throw DomainError("ion site " + std::to_string(site) + " is not on the ruler");
  const int d = basis.mode_count();
  const Eigen::VectorXd& x0 = basis.x0s();
  const Eigen::MatrixXd& ut = basis.u_tilde_matrix();

  GaussianAmplitude amp;
  amp.site = site;
  const Eigen::VectorXd inv4x02 = (4.0 * x0.array().square()).inverse();
  amp.precision = ut.transpose() * inv4x02.asDiagonal() * ut;
  amp.precision = 0.5 * (amp.precision + amp.precision.transpose());
  factor_or_throw<Eigen::LLT<Eigen::MatrixXd>>(amp.precision, "amplitude precision");

  // Mode centres 2 lambda_{alpha,site} x0_alpha, mapped to local coordinates with phi_n = sum u_{alpha,n} x_alpha.
  const Eigen::VectorXd mode_center = 2.0 * model.site_couplings(site).cwiseProduct(x0);
  amp.center = basis.u_matrix().rightCols(d).transpose() * mode_center;

  amp.log_norm = -0.25 * (2.0 * std::numbers::pi * x0.array().square()).log().sum();
  amp.log_jacobian = 0.5 * std::log(static_cast<double>(basis.size()));
  return amp;
}

double DoubledKernel::log_value(const Eigen::Vector4d& y) const {
  const Eigen::Vector4d d = y - peak;
  return log_peak - d.dot(quad * d);
}

double DoubledKernel::value(const Eigen::Vector4d& y) const { return std::exp(log_value(y)); }

double DoubledKernel::log_diagonal_trace() const {
  Eigen::Matrix<double, 4, 2> J;
  J << 1, 0, 0, 1, 1, 0, 0, 1;
  const Eigen::Matrix2d M = J.transpose() * quad * J;
  const Eigen::Vector2d h = J.transpose() * quad * peak;
  return log_peak - peak.dot(quad * peak) + h.dot(M.ldlt().solve(h)) + std::log(std::numbers::pi) -
         0.5 * std::log(M.determinant());
}

double DoubledKernel::log_full_integral() const {
  return log_peak + 2.0 * std::log(std::numbers::pi) - 0.5 * std::log(quad.determinant());
}

DoubledKernel DoubledKernel::scaled(double delta) const {
  DoubledKernel k = *this;
  k.log_prefactor += delta;
  k.log_peak += delta;
  return k;
}

DoubledKernel trace_to_doubled_kernel(const GaussianAmplitude& ket, const GaussianAmplitude& bra, int i1, int i2,
                                      const ModeBasis& basis) {
  if (i1 == i2) throw DomainError("kept sites i1 and i2 must differ");
  for (int s : {i1, i2}) {
    if (!basis.is_kept(s))
      throw DomainError("site " + std::to_string(s) + " is not a kept coordinate (left edge is eliminated)");
  }
  const int d = basis.mode_count();
  if (ket.dim() != d || bra.dim() != d) throw DomainError("amplitude dimension does not match the basis");

  const int k1 = basis.reduced_offset(i1);
  const int k2 = basis.reduced_offset(i2);
  const int traced = d - 2;
  const int D = 4 + traced;

  // Position of each reduced coordinate in the doubled vector w = (a, a', v).
  std::vector<int> ket_map(d), bra_map(d);
  for (int r = 0, j = 0; r < d; ++r) {
    if (r == k1) {
      ket_map[r] = 0;
      bra_map[r] = 2;
    } else if (r == k2) {
      ket_map[r] = 1;
      bra_map[r] = 3;
    } else {
      ket_map[r] = bra_map[r] = 4 + j++;
    }
  }

  // Shift w by a reference point so the linear terms stay small: kept coordinates at their
  // branch centres, traced ones at the midpoint of the two branch centres.
  Eigen::VectorXd ref(D);
  for (int r = 0; r < d; ++r) {
    if (r == k1 || r == k2) {
      ref[ket_map[r]] = ket.center[r];
      ref[bra_map[r]] = bra.center[r];
    } else {
      ref[ket_map[r]] = 0.5 * (ket.center[r] + bra.center[r]);
    }
  }

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(D, D);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(D);
  double g0 = 0.0;
  auto accumulate = [&](const GaussianAmplitude& amp, const std::vector<int>& map) {
    // offset o = S ref - c; quadratic (S dw + o)^T A (S dw + o).
    Eigen::VectorXd o(d);
    for (int r = 0; r < d; ++r) o[r] = ref[map[r]] - amp.center[r];
    const Eigen::VectorXd Ao = amp.precision * o;
    for (int p = 0; p < d; ++p) {
      g[map[p]] -= Ao[p];
      for (int q = 0; q < d; ++q) G(map[p], map[q]) += amp.precision(p, q);
    }
    g0 += o.dot(Ao);
  };
  accumulate(ket, ket_map);
  accumulate(bra, bra_map);
  // Exponent is -(dw^T G dw - 2 g^T dw + g0).

  const Eigen::Matrix4d Gyy = G.topLeftCorner(4, 4);
  const Eigen::MatrixXd Gyv = G.topRightCorner(4, traced);
  const Eigen::MatrixXd Gvv = G.bottomRightCorner(traced, traced);
  const Eigen::Vector4d gy = g.head(4);
  const Eigen::VectorXd gv = g.tail(traced);

  double log_int = 0.0;  // log of the traced Gaussian integral's constant part
  Eigen::Matrix4d Q = Gyy;
  Eigen::Vector4d h = gy;
  double constant = -g0;
  if (traced > 0) {
    const auto llt = factor_or_throw<Eigen::LLT<Eigen::MatrixXd>>(Gvv, "traced block of the doubled form");
    const Eigen::MatrixXd GvvInvGvy = llt.solve(Gyv.transpose());
    const Eigen::VectorXd GvvInvgv = llt.solve(gv);
    Q -= Gyv * GvvInvGvy;
    h -= Gyv * GvvInvgv;
    constant += gv.dot(GvvInvgv);
    log_int = 0.5 * traced * std::log(std::numbers::pi) - 0.5 * log_det(llt);
  }
  Q = 0.5 * (Q + Q.transpose()).eval();
  Eigen::LLT<Eigen::Matrix4d> qllt(Q);
  if (qllt.info() != Eigen::Success) throw NumericalError("doubled kernel quadratic form is not positive definite");

  // In shifted coordinates dy: exponent = p' - dy^T Q dy + 2 h^T dy.
  const double p_shift = std::log(0.5) + ket.log_jacobian + ket.log_norm + bra.log_norm + log_int + constant;
  const Eigen::Vector4d dpeak = qllt.solve(h);

  DoubledKernel k;
  k.ket_site = ket.site;
  k.bra_site = bra.site;
  k.i1 = i1;
  k.i2 = i2;
  k.quad = Q;
  k.peak = ref.head(4) + dpeak;
  k.log_peak = p_shift + h.dot(dpeak);
  k.linear = 2.0 * Q * k.peak;
  k.log_prefactor = k.log_peak - k.peak.dot(Q * k.peak);
  k.phase = ket.global_phase * std::conj(bra.global_phase);
  return k;
}

BoxProjectorSpec make_box_spec(double c, int i1, int i2, const IonModel& model, const ModeBasis& basis,
                               int edge_margin) {
  if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("precision parameter c must be positive, got " + format_number(c));
  BoxProjectorSpec spec;
  spec.c = c;
  spec.i1 = i1;
  spec.i2 = i2;
  for (int l = 1; l <= 2; ++l) {
    for (int m = 1; m <= 2; ++m)
      spec.centers[l - 1][m - 1] = mean_at_site_given_branch(l, m, i1, i2, model, basis, edge_margin);
    spec.halfwidths[l - 1] = c * basis.zero_point_sigma(l == 1 ? i1 : i2);
  }
  return spec;
}

double BoxIntegral::value() const { return std::exp(log_value); }

BoxIntegral integrate_box(const DoubledKernel& kernel, const std::array<double, 4>& lower,
                          const std::array<double, 4>& upper) {
  for (int j = 0; j < 4; ++j) {
    if (!(upper[j] > lower[j])) throw DomainError("box must have positive width in every coordinate");
  }
  const Eigen::Matrix4d& Q = kernel.quad;
  double previous = std::numeric_limits<double>::quiet_NaN();
  BoxIntegral out;
  for (int order : kBoxOrders) {
    const auto& rule = quad::gauss_legendre(order);
    // Shifted nodes per axis and their log weights.
    std::array<std::vector<double>, 4> x, lw;
    for (int j = 0; j < 4; ++j) {
      const double mid = 0.5 * (upper[j] + lower[j]);
      const double rad = 0.5 * (upper[j] - lower[j]);
      x[j].resize(order);
      lw[j].resize(order);
      for (int k = 0; k < order; ++k) {
        x[j][k] = mid + rad * rule.nodes[k] - kernel.peak[j];
        lw[j][k] = std::log(rad * rule.weights[k]);
      }
    }
    std::vector<double> exponents;
    exponents.reserve(static_cast<std::size_t>(order) * order * order * order);
    double top = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < order; ++a) {
      for (int b = 0; b < order; ++b) {
        for (int c = 0; c < order; ++c) {
          for (int e = 0; e < order; ++e) {
            const Eigen::Vector4d y(x[0][a], x[1][b], x[2][c], x[3][e]);
            const double v = lw[0][a] + lw[1][b] + lw[2][c] + lw[3][e] - y.dot(Q * y);
            exponents.push_back(v);
            top = std::max(top, v);
          }
        }
      }
    }
    double sum = 0.0;
    for (double v : exponents) sum += std::exp(v - top);
    const double log_value = kernel.log_peak + top + std::log(sum);
    out.order = order;
    out.log_value = log_value;
    if (!std::isnan(previous)) {
      out.rel_change = std::abs(std::expm1(log_value - previous));
      if (out.rel_change < kBoxRelTol) return out;
    }
    previous = log_value;
  }
  throw NumericalError("box integral did not converge up to Gauss-Legendre order " +
                       std::to_string(kBoxOrders.back()) + " (last relative change " +
                       format_number(out.rel_change) + ")");
}

BoxIntegral project_box(const DoubledKernel& kernel, const BoxProjectorSpec& spec, Pairing pairing) {
  const int m = pairing.ket_branch - 1;
  const int mp = pairing.bra_branch - 1;
  if (m < 0 || m > 1 || mp < 0 || mp > 1) throw DomainError("pairing branches must be 1 or 2");
  const std::array<double, 4> lo{spec.lower(0, m), spec.lower(1, m), spec.lower(0, mp), spec.lower(1, mp)};
  const std::array<double, 4> hi{spec.upper(0, m), spec.upper(1, m), spec.upper(0, mp), spec.upper(1, mp)};
  BoxIntegral box = integrate_box(kernel, lo, hi);
  // |Psi*> carries 1/sqrt2 per branch and 1/sqrt(2 c dphi) per window, on both bra and ket.
  box.log_value += std::log(0.5) - std::log(2.0 * spec.halfwidths[0]) - std::log(2.0 * spec.halfwidths[1]);
  return box;
}

CStarResult cstar_from_kernels(const std::array<std::array<DoubledKernel, 2>, 2>& kernels,
                               const BoxProjectorSpec& spec) {
  CStarResult r;
  r.i1 = spec.i1;
  r.i2 = spec.i2;
  r.c = spec.c;
  r.mirror_symmetric = spec.i1 == -spec.i2;
  for (int m = 0; m < 2; ++m) {
    for (int mp = 0; mp < 2; ++mp) {
      const BoxIntegral box = project_box(kernels[m][mp], spec, Pairing{m + 1, mp + 1});
      r.log_terms[m][mp] = box.log_value;
      r.orders[m][mp] = box.order;
    }
  }
  const double l11 = r.log_terms[0][0];
  const double l22 = r.log_terms[1][1];
  const double l12 = r.log_terms[0][1];
  const double l21 = r.log_terms[1][0];
  r.diagonal_mismatch = std::abs(std::expm1(l22 - l11));
  r.offdiagonal_mismatch = std::abs(std::expm1(l21 - l12));
  if (r.offdiagonal_mismatch > kCheckRelTol)
    throw NumericalError("hermiticity check failed: |t12| and |t21| differ by " + format_number(r.offdiagonal_mismatch));
  if (r.mirror_symmetric && r.diagonal_mismatch > kCheckRelTol)
    throw NumericalError("mirror-symmetric placement but t11 and t22 differ by " + format_number(r.diagonal_mismatch));

  r.log_cstar = log_add(l12, l21) - log_add(l11, l22);
  r.cstar = std::exp(r.log_cstar);
  r.ratio = std::exp(l12 - l11);
  r.underflow = l11 < std::log(kUnderflow);
  return r;
}

CStarResult cstar(int i1, int i2, double c, const IonModel& model, const ModeBasis& basis, int edge_margin) {
  if (i1 == i2) throw DomainError("C* needs two distinct ion sites");
  require_edge_safe(basis, i1, edge_margin);
  require_edge_safe(basis, i2, edge_margin);
  const BoxProjectorSpec spec = make_box_spec(c, i1, i2, model, basis, edge_margin);
  const std::array<GaussianAmplitude, 2> amp{build_branch_amplitude(i1, model, basis),
                                             build_branch_amplitude(i2, model, basis)};
  std::array<std::array<DoubledKernel, 2>, 2> kernels;
  for (int m = 0; m < 2; ++m)
    for (int mp = 0; mp < 2; ++mp) kernels[m][mp] = trace_to_doubled_kernel(amp[m], amp[mp], i1, i2, basis);
  return cstar_from_kernels(kernels, spec);
}

std::string CStarResult::to_json() const {
  auto term = [&](int m, int mp) {
    return nlohmann::json{{"log", log_terms[m][mp]}, {"value", std::exp(log_terms[m][mp])}, {"gl_order", orders[m][mp]}};
  };
  nlohmann::json j{{"i1", i1},
                   {"i2", i2},
                   {"separation", std::abs(i1 - i2)},
                   {"c", c},
                   {"cstar", cstar},
                   {"log_cstar", log_cstar},
                   {"ratio_t12_over_t11", ratio},
                   {"terms", {{"t11", term(0, 0)}, {"t12", term(0, 1)}, {"t21", term(1, 0)}, {"t22", term(1, 1)}}},
                   {"diagonal_mismatch", diagonal_mismatch},
                   {"offdiagonal_mismatch", offdiagonal_mismatch},
                   {"mirror_symmetric", mirror_symmetric},
                   {"underflow", underflow},
                   {"branch_phases", "dropped: branch-global unit factors"}};
  return j.dump(2);
}

}  // namespace qruler
