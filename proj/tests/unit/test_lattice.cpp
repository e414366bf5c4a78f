#include "qruler/csv.hpp"
#include "qruler/error.hpp"
#include "qruler/lattice.hpp"
#include "qruler/oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

using namespace qruler;

namespace {

ModeBasis basis(int n, double s = 0.0) {
  RulerConfig cfg;
  cfg.n_dipoles = n;
  cfg.scaling_exponent = s;
  return build_mode_basis(cfg);
}

}  // namespace

TEST_CASE("three-dipole spectrum in closed form") {
  const ModeBasis b = basis(3);
  CHECK(b.Omega(1) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(b.Omega(2) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
  CHECK(check_discrete_eom(b) < 1e-12);
}

TEST_CASE("orthonormality, zero sum and equations of motion") {
  for (int n : {3, 5, 11, 41, 101}) {
    CAPTURE(n);
    const ModeBasis b = basis(n);
    const Eigen::MatrixXd gram = b.u_matrix() * b.u_matrix().transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(n - 1, n - 1)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(b.u_matrix().rowwise().sum().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(check_discrete_eom(b) < 1e-10);
    for (int a = 1; a + 1 < n; ++a) CHECK(b.Omega(a) < b.Omega(a + 1));
    CHECK(b.Omega(1) > 0.0);
    CHECK(b.Omega(n - 1) < 2.0 * b.omega_r());
  }
}

TEST_CASE("spectrum and profiles match a dense eigensolver at N=41") {
  const ModeBasis b = basis(41, 1.0);
  const oracle::DenseModes dense = oracle::dense_modes(41, b.config().mass(), b.config().stiffness());
  CHECK((dense.Omega - b.Omegas()).cwiseAbs().maxCoeff() < 1e-10);
  // Eigenvector signs are arbitrary; align on the left-edge entry.
  for (int a = 1; a <= 40; ++a) {
    const double sign = b.u(a, -20) > 0 ? 1.0 : -1.0;
    CHECK((sign * b.u_matrix().row(a - 1) - dense.u.row(a - 1)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("corrupted profiles fail the equations of motion") {
  const ModeBasis b = basis(41);
  Eigen::MatrixXd u = b.u_matrix();
  u(3, 7) += 1e-3;
  CHECK(eom_residual(b.omega_r(), b.Omegas(), u) > 1e-6);
}

TEST_CASE("zero-point widths shrink with N under scaling") {
  for (int a : {1, 2, 5}) {
    CHECK(basis(21, 1.0).x0(a) < basis(11, 1.0).x0(a));
    CHECK(basis(41, 1.0).x0(a) < basis(21, 1.0).x0(a));
  }
}

TEST_CASE("reduced profiles subtract the left edge") {
  const ModeBasis b = basis(7);
  for (int a = 1; a <= 6; ++a)
    for (int n = -2; n <= 3; ++n) CHECK(b.u_tilde(a, n) == doctest::Approx(b.u(a, n) - b.u(a, -3)).epsilon(1e-15));
  CHECK(std::abs(b.u_tilde_matrix().determinant()) == doctest::Approx(std::sqrt(7.0)).epsilon(1e-12));
}

TEST_CASE("mode and local coordinates") {
  const ModeBasis b = basis(5);
  SUBCASE("zero maps to zero") {
    CHECK(local_from_modes(b, Eigen::VectorXd::Zero(4)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("unit vector maps to a profile") {
    for (int a = 1; a <= 4; ++a) {
      const Eigen::VectorXd phi = local_from_modes(b, Eigen::VectorXd::Unit(4, a - 1));
      CHECK((phi.transpose() - b.u_matrix().row(a - 1)).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
  SUBCASE("round trip and constraint") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int k = 0; k < 10; ++k) {
      Eigen::VectorXd x(4);
      for (auto& v : x) v = g(rng);
      const Eigen::VectorXd phi = local_from_modes(b, x);
      CHECK(std::abs(phi.sum()) < 1e-10);
      const Eigen::VectorXd back = modes_from_local(b, phi.tail(4));
      CHECK((back - x).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  SUBCASE("constant reduced vector completes to zero sum") {
    const Eigen::VectorXd all = complete_with_constraint(b, Eigen::VectorXd::Constant(4, 0.3));
    CHECK(all.size() == 5);
    CHECK(std::abs(all.sum()) < 1e-15);
    CHECK(all[0] == doctest::Approx(-1.2));
    const Eigen::VectorXd x = modes_from_local(b, Eigen::VectorXd::Constant(4, 0.3));
    CHECK((local_from_modes(b, x) - all).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(local_from_modes(b, Eigen::VectorXd::Zero(3)), DomainError);
    CHECK_THROWS_AS(modes_from_local(b, Eigen::VectorXd::Zero(5)), DomainError);
  }
}

TEST_CASE("configuration errors") {
  RulerConfig cfg;
  cfg.n_dipoles = 4;
  CHECK_THROWS_AS(build_mode_basis(cfg), ConfigError);
  cfg.n_dipoles = 1;
  CHECK_THROWS_AS(build_mode_basis(cfg), ConfigError);
  cfg.n_dipoles = 5;
  cfg.mass0 = 0.0;
  CHECK_THROWS_AS(build_mode_basis(cfg), ConfigError);
  cfg.mass0 = 1.0;
  cfg.stiffness0 = -1.0;
  CHECK_THROWS_AS(build_mode_basis(cfg), ConfigError);
}

TEST_CASE("edge safety") {
  const ModeBasis b = basis(11);
  CHECK_NOTHROW(require_edge_safe(b, 3));
  CHECK_NOTHROW(require_edge_safe(b, -3));
  CHECK_THROWS_AS(require_edge_safe(b, 4), DomainError);
  CHECK_THROWS_AS(require_edge_safe(b, -4), DomainError);
}

TEST_CASE("mode table and number format") {
  std::ostringstream os;
  write_mode_table(os, basis(3));
  const std::string s = os.str();
  CHECK(s.rfind("alpha,n,u,omega\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 2 * 3);
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(1.5e-20) == "1.5e-20");
}
