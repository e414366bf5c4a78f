#include "golden.hpp"

#include "qruler/error.hpp"
#include "qruler/measurement.hpp"
#include "qruler/oracle.hpp"
#include "qruler/response.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace qruler;

namespace {

ModeBasis basis(int n, double s = 0.0) {
  RulerConfig cfg;
  cfg.n_dipoles = n;
  cfg.scaling_exponent = s;
  return build_mode_basis(cfg);
}

Eigen::Vector4d v4(const nlohmann::json& a) {
  return Eigen::Vector4d(a[0].get<double>(), a[1].get<double>(), a[2].get<double>(), a[3].get<double>());
}

// Bivariate normal density of (phi_i1, phi_i2) for the ion at `site`.
double joint_density(int site, int i1, int i2, double a1, double a2, const IonModel& m, const ModeBasis& b) {
  const ResponseProfile p = response_single(site, m, b);
  const Eigen::MatrixXd W = b.x0s().asDiagonal() * b.u_matrix();
  const int o1 = b.site_offset(i1), o2 = b.site_offset(i2);
  Eigen::Matrix2d S;
  S << W.col(o1).squaredNorm(), W.col(o1).dot(W.col(o2)), W.col(o1).dot(W.col(o2)), W.col(o2).squaredNorm();
  const Eigen::Vector2d d(a1 - p.mean[o1], a2 - p.mean[o2]);
  return std::exp(-0.5 * d.dot(S.inverse() * d)) / (2.0 * std::numbers::pi * std::sqrt(S.determinant()));
}

}  // namespace

TEST_CASE("branch amplitude matches the product of mode ground states") {
  const ModeBasis b = basis(5);
  const IonModel m = build_dimensionless_model(b, 1.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int site : {-1, 0, 2}) {
    const GaussianAmplitude amp = build_branch_amplitude(site, m, b);
    const oracle::DenseBranch ref = oracle::make_branch(site, m, b);
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd phi(4);
      for (auto& v : phi) v = 0.7 * g(rng);
      CHECK(amp.value(phi) == doctest::Approx(ref.amplitude_reduced(phi)).epsilon(1e-10));
    }
  }
}

TEST_CASE("amplitude normalisation on a dense grid") {
  const ModeBasis b = basis(5);
  const IonModel m = build_dimensionless_model(b, 1.0);
  CHECK(oracle::branch_normalisation(oracle::make_branch(0, m, b), 24) == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("amplitude centres and widths agree with the response module") {
  const ModeBasis b = basis(21, 1.0);
  for (double lam : {0.0, 2.0}) {
    const IonModel m = build_dimensionless_model(b, lam);
    const GaussianAmplitude amp = build_branch_amplitude(3, m, b);
    const ResponseProfile p = response_single(3, m, b);
    const Eigen::MatrixXd cov = amp.density_covariance();
    for (int n = -9; n <= 10; ++n) {
      const int r = b.reduced_offset(n);
      CHECK(std::abs(amp.center[r] - p.mean_at(n)) < 1e-10);
      CHECK(cov(r, r) == doctest::Approx(b.zero_point_sigma(n) * b.zero_point_sigma(n)).epsilon(1e-10));
    }
    if (lam == 0.0) CHECK(amp.center.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("doubled kernel structure") {
  const ModeBasis b = basis(11, 1.0);
  const IonModel m = build_dimensionless_model(b, 2.0);
  const GaussianAmplitude a1 = build_branch_amplitude(-1, m, b), a2 = build_branch_amplitude(1, m, b);
  const DoubledKernel k11 = trace_to_doubled_kernel(a1, a1, -1, 1, b);
  const DoubledKernel k12 = trace_to_doubled_kernel(a1, a2, -1, 1, b);
  const DoubledKernel k21 = trace_to_doubled_kernel(a2, a1, -1, 1, b);
  SUBCASE("diagonal trace is the branch weight") {
    CHECK(std::exp(k11.log_diagonal_trace()) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::exp(trace_to_doubled_kernel(a2, a2, -1, 1, b).log_diagonal_trace()) ==
          doctest::Approx(0.5).epsilon(1e-10));
  }
  SUBCASE("hermiticity") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int k = 0; k < 10; ++k) {
      const Eigen::Vector4d y(g(rng), g(rng), g(rng), g(rng));
      const Eigen::Vector4d swapped(y[2], y[3], y[0], y[1]);
      CHECK(k12.log_value(y) == doctest::Approx(k21.log_value(swapped)).epsilon(1e-10));
    }
  }
  SUBCASE("diagonal marginal is half the joint density") {
    for (double s1 : {-0.3, 0.0, 0.4}) {
      for (double s2 : {-0.2, 0.5}) {
        const Eigen::Vector4d y(k11.peak[0] + s1, k11.peak[1] + s2, k11.peak[0] + s1, k11.peak[1] + s2);
        CHECK(k11.value(y) == doctest::Approx(0.5 * joint_density(-1, -1, 1, y[0], y[1], m, b)).epsilon(1e-10));
      }
    }
  }
  SUBCASE("linear and prefactor form agrees with the completed square") {
    const Eigen::Vector4d y(0.1, -0.2, 0.3, 0.05);
    const double direct = k12.log_prefactor - y.dot(k12.quad * y) + k12.linear.dot(y);
    CHECK(direct == doctest::Approx(k12.log_value(y)).epsilon(1e-10));
  }
  SUBCASE("invalid site pairs") {
    CHECK_THROWS_AS(trace_to_doubled_kernel(a1, a2, 1, 1, b), DomainError);
    CHECK_THROWS_AS(trace_to_doubled_kernel(a1, a2, -5, 1, b), DomainError);
  }
}

TEST_CASE("zero coupling makes every branch pair identical") {
  const ModeBasis b = basis(11, 1.0);
  const IonModel m = build_dimensionless_model(b, 0.0);
  const GaussianAmplitude a1 = build_branch_amplitude(-2, m, b), a2 = build_branch_amplitude(2, m, b);
  const DoubledKernel k11 = trace_to_doubled_kernel(a1, a1, -2, 2, b);
  const DoubledKernel k12 = trace_to_doubled_kernel(a1, a2, -2, 2, b);
  CHECK(k11.log_peak == doctest::Approx(k12.log_peak).epsilon(1e-12));
  CHECK((k11.quad - k12.quad).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("kernel values agree with the oracle golden files") {
  for (const char* name : {"kernel_n5.json", "kernel_n7.json"}) {
    CAPTURE(name);
    const auto g = load_golden(name);
    const ModeBasis b = basis(g["inputs"]["n_dipoles"].get<int>());
    const IonModel m = build_dimensionless_model(b, g["inputs"]["lambda"].get<double>());
    const int i1 = g["inputs"]["i1"], i2 = g["inputs"]["i2"];
    for (const auto& e : g["entries"]) {
      const GaussianAmplitude ket = build_branch_amplitude(e["ket_site"].get<int>(), m, b);
      const GaussianAmplitude bra = build_branch_amplitude(e["bra_site"].get<int>(), m, b);
      const DoubledKernel k = trace_to_doubled_kernel(ket, bra, i1, i2, b);
      CHECK(k.value(v4(e["u4"])) == doctest::Approx(e["value"].get<double>()).epsilon(1e-6));
    }
  }
}

TEST_CASE("box integration") {
  SUBCASE("separable kernel against erf products") {
    DoubledKernel k;
    k.quad = Eigen::Vector4d(1.0, 2.0, 0.5, 3.0).asDiagonal();
    k.peak = Eigen::Vector4d(0.1, -0.2, 0.3, 0.0);
    k.log_peak = -1.0;
    const std::array<double, 4> lo{-0.5, -1.0, 0.0, -0.1}, hi{0.7, 0.1, 1.5, 0.4};
    double expect = std::exp(-1.0);
    for (int j = 0; j < 4; ++j) {
      const double s = std::sqrt(k.quad(j, j));
      expect *= 0.5 * std::sqrt(std::numbers::pi) / s * (std::erf(s * (hi[j] - k.peak[j])) - std::erf(s * (lo[j] - k.peak[j])));
    }
    const BoxIntegral r = integrate_box(k, lo, hi);
    CHECK(r.value() == doctest::Approx(expect).epsilon(1e-10));
    CHECK(r.rel_change < 1e-8);
  }
  SUBCASE("a wide box recovers the full integral") {
    const ModeBasis b = basis(11, 1.0);
    const IonModel m = build_dimensionless_model(b, 2.0);
    const GaussianAmplitude a = build_branch_amplitude(0, m, b);
    const DoubledKernel k = trace_to_doubled_kernel(a, a, -1, 1, b);
    std::array<double, 4> lo{}, hi{};
    const Eigen::Matrix4d cov = (2.0 * k.quad).inverse();
    for (int j = 0; j < 4; ++j) {
      lo[j] = k.peak[j] - 10.0 * std::sqrt(cov(j, j));
      hi[j] = k.peak[j] + 10.0 * std::sqrt(cov(j, j));
    }
    CHECK(integrate_box(k, lo, hi).log_value == doctest::Approx(k.log_full_integral()).epsilon(1e-8));
  }
  SUBCASE("empty box is rejected") {
    DoubledKernel k;
    k.quad = Eigen::Matrix4d::Identity();
    CHECK_THROWS_AS(integrate_box(k, {0, 0, 0, 0}, {1, 0, 1, 1}), DomainError);
  }
}

TEST_CASE("joint measurement coherence") {
  const ModeBasis b = basis(41, 1.0);
  SUBCASE("zero coupling") {
    const CStarResult r = cstar(-2, 2, 0.1, build_dimensionless_model(b, 0.0), b);
    CHECK(r.cstar == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("range, symmetry and site swap") {
    const IonModel m = build_dimensionless_model(b, 2.0);
    for (auto [i1, i2] : {std::pair{-2, 2}, std::pair{-1, 3}, std::pair{-4, 5}}) {
      const CStarResult r = cstar(i1, i2, 0.1, m, b);
      const CStarResult s = cstar(i2, i1, 0.1, m, b);
      CHECK(r.cstar >= 0.0);
      CHECK(r.cstar <= 1.0);
      CHECK(r.cstar == doctest::Approx(s.cstar).epsilon(1e-8));
      CHECK(r.offdiagonal_mismatch < 1e-8);
    }
    const CStarResult mirror = cstar(-3, 3, 0.1, m, b);
    CHECK(mirror.mirror_symmetric);
    CHECK(mirror.diagonal_mismatch < 1e-8);
    CHECK(mirror.ratio == doctest::Approx(mirror.cstar).epsilon(1e-8));
  }
  SUBCASE("prefactor normalisation cancels") {
    const IonModel m = build_dimensionless_model(b, 2.0);
    const BoxProjectorSpec spec = make_box_spec(0.1, -2, 2, m, b);
    const std::array<GaussianAmplitude, 2> amp{build_branch_amplitude(-2, m, b), build_branch_amplitude(2, m, b)};
    std::array<std::array<DoubledKernel, 2>, 2> k, scaled;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        k[x][y] = trace_to_doubled_kernel(amp[x], amp[y], -2, 2, b);
        scaled[x][y] = k[x][y].scaled(std::log(37.5));
      }
    CHECK(cstar_from_kernels(scaled, spec).cstar == doctest::Approx(cstar_from_kernels(k, spec).cstar).epsilon(1e-12));
  }
  SUBCASE("shrinking the windows changes little") {
    const IonModel m = build_dimensionless_model(b, 2.0);
    for (int sep : {2, 6, 10}) {
      const double coarse = cstar(-sep / 2, sep - sep / 2, 0.1, m, b).cstar;
      const double fine = cstar(-sep / 2, sep - sep / 2, 0.01, m, b).cstar;
      CHECK(std::abs(fine / coarse - 1.0) < 0.05);
    }
  }
  SUBCASE("strong coupling stays finite in log space") {
    const CStarResult r = cstar(-7, 7, 0.1, build_dimensionless_model(b, 25.0), b);
    CHECK(std::isfinite(r.log_cstar));
    CHECK(r.log_cstar < -300.0);
    CHECK(r.cstar >= 0.0);
    CHECK(r.to_json().find("log_cstar") != std::string::npos);
  }
  SUBCASE("preconditions") {
    const IonModel m = build_dimensionless_model(b, 2.0);
    CHECK_THROWS_AS(cstar(1, 1, 0.1, m, b), DomainError);
    CHECK_THROWS_AS(cstar(-19, 1, 0.1, m, b), DomainError);
    CHECK_THROWS_AS(cstar(-1, 1, 0.0, m, b), ConfigError);
  }
}

TEST_CASE("C* agrees with the Monte Carlo oracle golden values") {
  for (const char* name : {"cstar_n7.json", "cstar_n5.json"}) {
    CAPTURE(name);
    const auto g = load_golden(name);
    const auto& in = g["inputs"];
    const ModeBasis b = basis(in["n_dipoles"].get<int>());
    const IonModel m = build_dimensionless_model(b, in["lambda"].get<double>());
    const CStarResult r = cstar(in["i1"], in["i2"], in["c"], m, b, 0);
    CHECK(std::abs(r.cstar - g["value"].get<double>()) < 3.0 * g["std_error"].get<double>());
  }
}
