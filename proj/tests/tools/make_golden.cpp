// Writes oracle reference values to JSON golden files. Run once; the outputs are frozen in tests/golden.

#include "qruler/oracle.hpp"

#include <json.hpp>

#include <fstream>
#include <iostream>
#include <random>
#include <string>

using namespace qruler;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSeed = 20240611;

ModeBasis basis_for(int n) {
  RulerConfig cfg;
  cfg.n_dipoles = n;
  return build_mode_basis(cfg);
}

json kernel_file(int n, double lambda, int count) {
  const ModeBasis basis = basis_for(n);
  const IonModel model = build_dimensionless_model(basis, lambda);
  const int i1 = -1, i2 = 1;
  std::mt19937_64 rng(kSeed + n);
  std::normal_distribution<double> gauss;
  json entries = json::array();
  for (int k = 0; k < count; ++k) {
    const int ket = k % 2 ? i2 : i1;
    const int bra = (k / 2) % 2 ? i2 : i1;
    const auto mk = oracle::make_branch(ket, model, basis).site_means();
    const auto mb = oracle::make_branch(bra, model, basis).site_means();
    const int half = (n - 1) / 2;
    std::array<double, 4> u4{};
    u4[0] = mk[i1 + half] + 0.5 * gauss(rng);
    u4[1] = mk[i2 + half] + 0.5 * gauss(rng);
    u4[2] = mb[i1 + half] + 0.5 * gauss(rng);
    u4[3] = mb[i2 + half] + 0.5 * gauss(rng);
    const double v = oracle::kernel_value(ket, bra, i1, i2, u4, model, basis);
    entries.push_back({{"ket_site", ket}, {"bra_site", bra}, {"u4", u4}, {"value", v}});
  }
  return {{"kind", "kernel_value"},
          {"inputs", {{"n_dipoles", n}, {"lambda", lambda}, {"i1", i1}, {"i2", i2}, {"mass0", 1}, {"stiffness0", 1}}},
          {"seed", kSeed + n},
          {"method", "composite Gauss-Legendre, 8 panels x 8 points per traced axis, +-8 sigma"},
          {"rel_tolerance", 1e-6},
          {"entries", entries}};
}

json cstar_file(int n, double lambda, double c, int i1, int i2, std::int64_t samples) {
  const ModeBasis basis = basis_for(n);
  const IonModel model = build_dimensionless_model(basis, lambda);
  const oracle::Estimate e = oracle::cstar(i1, i2, c, model, basis, samples, kSeed);
  return {{"kind", "cstar"},
          {"inputs", {{"n_dipoles", n}, {"lambda", lambda}, {"c", c}, {"i1", i1}, {"i2", i2}}},
          {"seed", e.seed},
          {"samples", e.samples},
          {"value", e.value},
          {"std_error", e.std_error}};
}

json response_file(int n, double lambda, int i1, int i2, std::int64_t samples) {
  const ModeBasis basis = basis_for(n);
  const IonModel model = build_dimensionless_model(basis, lambda);
  const oracle::ResponseEstimate r = oracle::response(i1, i2, model, basis, samples, kSeed);
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"kind", "response"},
          {"inputs", {{"n_dipoles", n}, {"lambda", lambda}, {"i1", i1}, {"i2", i2}}},
          {"seed", r.seed},
          {"samples", r.samples},
          {"mean", vec(r.mean)},
          {"mean_std_error", vec(r.mean_se)},
          {"sigma", vec(r.sigma)},
          {"sigma_std_error", vec(r.sigma_se)}};
}

void write(const std::string& dir, const std::string& name, const json& j) {
  std::ofstream f(dir + "/" + name);
  f << j.dump(2) << '\n';
  std::cout << "wrote " << dir << "/" << name << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_golden <output-dir>\n";
    return 1;
  }
  const std::string dir = argv[1];
  write(dir, "kernel_n5.json", kernel_file(5, 1.0, 20));
  write(dir, "kernel_n7.json", kernel_file(7, 1.0, 8));
  write(dir, "cstar_n7.json", cstar_file(7, 1.0, 0.1, -1, 1, 1000000));
  write(dir, "cstar_n5.json", cstar_file(5, 1.0, 0.1, -1, 1, 1000000));
  write(dir, "response_n7_single.json", response_file(7, 1.0, 0, 0, 400000));
  write(dir, "response_n7_superposition.json", response_file(7, 1.0, -1, 1, 400000));
  write(dir, "response_n7_free.json", response_file(7, 0.0, 0, 0, 400000));
  return 0;
}
