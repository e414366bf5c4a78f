#include "qruler/oracle.hpp"

#include "qruler/error.hpp"
#include "qruler/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <thread>
#include <vector>

namespace qruler::oracle {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kGridLimit = 1e8;
constexpr int kStreams = 16;

void require_small(int n) {
  if (n < 3 || n > kMaxN || n % 2 == 0) throw DomainError("oracle supports odd N in 3..7, got " + std::to_string(n));
}

struct ClosedModes {
  Eigen::VectorXd Omega;
  Eigen::VectorXd x0;
  Eigen::MatrixXd u;
};

ClosedModes closed_modes(const RulerConfig& cfg) {
  const int N = cfg.n_dipoles;
  const double m = std::pow(N, cfg.scaling_exponent) * cfg.mass0;
  const double k = std::pow(N, cfg.scaling_exponent) * cfg.stiffness0;
  const double wr = std::sqrt(k / m);
  ClosedModes out;
  out.Omega.resize(N - 1);
  out.x0.resize(N - 1);
  out.u.resize(N - 1, N);
  for (int a = 1; a < N; ++a) {
    out.Omega[a - 1] = 2.0 * wr * std::sin(a * kPi / (2.0 * N));
    out.x0[a - 1] = std::sqrt(cfg.hbar / (2.0 * m * out.Omega[a - 1]));
    for (int j = 0; j < N; ++j) out.u(a - 1, j) = std::sqrt(2.0 / N) * std::cos(a * kPi * (j + 0.5) / N);
  }
  return out;
}

// Kept sites other than i1 and i2, as site offsets.
std::vector<int> traced_offsets(int N, int o1, int o2) {
  std::vector<int> out;
  for (int j = 1; j < N; ++j)
    if (j != o1 && j != o2) out.push_back(j);
  return out;
}

double log_amplitude_from_modes(const DenseBranch& b, const Eigen::VectorXd& x) {
  double s = 0.0;
  for (Eigen::Index a = 0; a < x.size(); ++a) {
    const double d = (x[a] - b.center[a]) / b.x0[a];
    s += -0.25 * std::log(2.0 * kPi * b.x0[a] * b.x0[a]) - 0.25 * d * d;
  }
  return s;
}

// Mode-space column for a reduced coordinate: moving phi_j moves the left edge by -phi_j.
Eigen::VectorXd reduced_column(const DenseBranch& b, int offset) { return b.u.col(offset) - b.u.col(0); }

}  // namespace

DenseModes dense_modes(int n_dipoles, double mass, double stiffness) {
  if (n_dipoles < 2) throw DomainError("dense_modes needs at least two dipoles");
  const int N = n_dipoles;
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(N, N);
  for (int j = 0; j + 1 < N; ++j) {
    K(j, j) += stiffness;
    K(j + 1, j + 1) += stiffness;
    K(j, j + 1) -= stiffness;
    K(j + 1, j) -= stiffness;
  }
  K /= mass;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  // Eigenvalues ascend; index 0 is the zero (centre-of-mass) mode.
  DenseModes out;
  out.Omega.resize(N - 1);
  out.u.resize(N - 1, N);
  for (int a = 1; a < N; ++a) {
    out.Omega[a - 1] = std::sqrt(std::max(0.0, es.eigenvalues()[a]));
    Eigen::VectorXd v = es.eigenvectors().col(a);
    if (v[0] < 0) v = -v;
    out.u.row(a - 1) = v.transpose();
  }
  return out;
}

double xi_simpson(double z, int intervals, double upper) {
  if (intervals < 2 || intervals % 2) throw DomainError("Simpson needs an even number of intervals");
  const double h = upper / intervals;
  auto f = [z](double x) { return std::exp(-2.0 * x) * x * std::pow(x * x + z * z, -2.5); };
  double s = f(0.0) + f(upper);
  for (int k = 1; k < intervals; ++k) s += (k % 2 ? 4.0 : 2.0) * f(k * h);
  return s * h / 3.0;
}

double unit_F3_closed(double Omega, double t, double b) {
  const double T = Omega * t;
  const double k = b * b / (1.0 + b * b);
  return -(1.0 - std::cos(T) - k * (1.0 - std::exp(-T / b) * (std::cos(T) + std::sin(T) / b)));
}

double unit_F2_closed(double Omega, double t, double b) {
  const double T = Omega * t;
  const double k = b * b / (1.0 + b * b);
  return -(std::sin(T) - k * (std::exp(-T / b) * (std::sin(T) - std::cos(T) / b) + 1.0 / b));
}

double DenseBranch::amplitude(const Eigen::VectorXd& phi_all) const {
  if (phi_all.size() != n_dipoles) throw DomainError("amplitude needs all N coordinates");
  return std::exp(log_amplitude_from_modes(*this, u * phi_all));
}

double DenseBranch::amplitude_reduced(const Eigen::VectorXd& phi_reduced) const {
  if (phi_reduced.size() != n_dipoles - 1) throw DomainError("amplitude needs N-1 reduced coordinates");
  Eigen::VectorXd all(n_dipoles);
  all[0] = -phi_reduced.sum();
  all.tail(n_dipoles - 1) = phi_reduced;
  return amplitude(all);
}

Eigen::VectorXd DenseBranch::site_means() const { return u.transpose() * center; }

Eigen::MatrixXd DenseBranch::site_covariance() const {
  return u.transpose() * x0.array().square().matrix().asDiagonal() * u;
}

DenseBranch make_branch(int site, const IonModel& model, const ModeBasis& basis) {
  const RulerConfig& cfg = basis.config();
  const int N = cfg.n_dipoles;
  const int half = (N - 1) / 2;
  if (site < -half || site > half) throw DomainError("site off the ruler");
  const ClosedModes cm = closed_modes(cfg);
  DenseBranch b;
  b.n_dipoles = N;
  b.site = site;
  b.x0 = cm.x0;
  b.u = cm.u;
  b.center.resize(N - 1);
  for (int a = 0; a < N - 1; ++a) {
    const double lam = model.lambda() * cm.x0[a] * cm.u(a, site + half) / (cfg.hbar * cm.Omega[a]);
    b.center[a] = 2.0 * lam * cm.x0[a];
  }
  return b;
}

double kernel_value(int ket_site, int bra_site, int i1, int i2, const std::array<double, 4>& u4,
                    const IonModel& model, const ModeBasis& basis, int panels, int points) {
  const int N = basis.config().n_dipoles;
  require_small(N);
  const int half = (N - 1) / 2;
  const int o1 = i1 + half, o2 = i2 + half;
  if (i1 == i2 || o1 <= 0 || o2 <= 0 || o1 >= N || o2 >= N) throw DomainError("i1, i2 must be distinct kept sites");
  const DenseBranch ket = make_branch(ket_site, model, basis);
  const DenseBranch bra = make_branch(bra_site, model, basis);
  const std::vector<int> traced = traced_offsets(N, o1, o2);
  const int dims = static_cast<int>(traced.size());
  const int per_axis = panels * points;
  if (std::pow(per_axis, dims) > kGridLimit) throw DomainError("oracle grid exceeds 1e8 points");

  const Eigen::VectorXd mk = ket.site_means(), mb = bra.site_means();
  const Eigen::MatrixXd cov = ket.site_covariance();
  const auto& rule = quad::gauss_legendre(points);

  // Nodes and weights for every traced axis.
  std::vector<std::vector<double>> x(dims), w(dims);
  for (int d = 0; d < dims; ++d) {
    const int j = traced[d];
    const double sd = std::sqrt(cov(j, j));
    const double lo = std::min(mk[j], mb[j]) - 8.0 * sd;
    const double hi = std::max(mk[j], mb[j]) + 8.0 * sd;
    const double width = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
      const double mid = lo + (p + 0.5) * width;
      for (int k = 0; k < points; ++k) {
        x[d].push_back(mid + 0.5 * width * rule.nodes[k]);
        w[d].push_back(0.5 * width * rule.weights[k]);
      }
    }
  }

  // Mode vectors with the fixed coordinates in place; traced coordinates are added incrementally.
  const Eigen::VectorXd c1k = reduced_column(ket, o1), c2k = reduced_column(ket, o2);
  const Eigen::VectorXd base_ket = c1k * u4[0] + c2k * u4[1];
  const Eigen::VectorXd base_bra = c1k * u4[2] + c2k * u4[3];
  std::vector<Eigen::VectorXd> cols(dims);
  for (int d = 0; d < dims; ++d) cols[d] = reduced_column(ket, traced[d]);

  double log_norm = 0.0;
  for (Eigen::Index a = 0; a < ket.x0.size(); ++a) log_norm -= 0.5 * std::log(2.0 * kPi * ket.x0[a] * ket.x0[a]);
  double sum = 0.0;
  std::function<void(int, const Eigen::VectorXd&, const Eigen::VectorXd&, double)> rec =
      [&](int d, const Eigen::VectorXd& xk, const Eigen::VectorXd& xb, double weight) {
        if (d == dims) {
          sum += weight * std::exp(log_amplitude_from_modes(ket, xk) + log_amplitude_from_modes(bra, xb));
          return;
        }
        if (d == dims - 1) {
          // Innermost axis without temporaries.
          for (std::size_t k = 0; k < x[d].size(); ++k) {
            double e = 0.0;
            for (Eigen::Index a = 0; a < xk.size(); ++a) {
              const double s = cols[d][a] * x[d][k];
              const double dk = (xk[a] + s - ket.center[a]) / ket.x0[a];
              const double db = (xb[a] + s - bra.center[a]) / bra.x0[a];
              e -= 0.25 * (dk * dk + db * db);
            }
            sum += weight * w[d][k] * std::exp(e + log_norm);
          }
          return;
        }
        for (std::size_t k = 0; k < x[d].size(); ++k) {
          const Eigen::VectorXd shift = cols[d] * x[d][k];
          rec(d + 1, xk + shift, xb + shift, weight * w[d][k]);
        }
      };
  rec(0, base_ket, base_bra, 1.0);
  return 0.5 * std::sqrt(static_cast<double>(N)) * sum;
}

Estimate cstar(int i1, int i2, double c, const IonModel& model, const ModeBasis& basis, std::int64_t samples,
               std::uint64_t seed, int threads) {
  const int N = basis.config().n_dipoles;
  require_small(N);
  if (i1 == i2) throw DomainError("C* needs two distinct sites");
  if (!(c > 0.0)) throw ConfigError("c must be positive");
  if (samples < kStreams) throw DomainError("too few samples");
  const int half = (N - 1) / 2;
  const int o1 = i1 + half, o2 = i2 + half;
  if (o1 <= 0 || o2 <= 0 || o1 >= N || o2 >= N) throw DomainError("i1, i2 must be kept sites");

  const std::array<DenseBranch, 2> br{make_branch(i1, model, basis), make_branch(i2, model, basis)};
  const std::array<Eigen::VectorXd, 2> means{br[0].site_means(), br[1].site_means()};
  const Eigen::MatrixXd cov = br[0].site_covariance();
  const std::array<double, 2> hw{c * std::sqrt(cov(o1, o1)), c * std::sqrt(cov(o2, o2))};
  const double box = 4.0 * hw[0] * hw[1];

  const std::vector<int> traced = traced_offsets(N, o1, o2);
  const int dims = static_cast<int>(traced.size());
  // Proposal for the traced coordinates: free zero-point marginal around the branch midpoint.
  Eigen::VectorXd q_mean(dims);
  Eigen::MatrixXd q_cov(dims, dims);
  for (int p = 0; p < dims; ++p) {
    q_mean[p] = 0.5 * (means[0][traced[p]] + means[1][traced[p]]);
    for (int q = 0; q < dims; ++q) q_cov(p, q) = cov(traced[p], traced[q]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(q_cov);
  if (llt.info() != Eigen::Success) throw NumericalError("proposal covariance is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();
  const double log_q_norm = -0.5 * dims * std::log(2.0 * kPi) - L.diagonal().array().log().sum();

  std::vector<Eigen::VectorXd> cols(N);
  for (int j = 1; j < N; ++j) cols[j] = reduced_column(br[0], j);
  const double pref = 0.5 * box * 0.5 * std::sqrt(static_cast<double>(N));

  struct Sums {
    double so = 0, sd = 0, soo = 0, sdd = 0, sod = 0;
    std::int64_t n = 0;
  };
  std::vector<Sums> streams(kStreams);
  auto run_stream = [&](int s) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const std::int64_t count = samples / kStreams + (s < samples % kStreams ? 1 : 0);
    Sums acc;
    Eigen::VectorXd z(dims);
    for (std::int64_t k = 0; k < count; ++k) {
      for (int d = 0; d < dims; ++d) z[d] = gauss(rng);
      const Eigen::VectorXd v = q_mean + L * z;
      const double log_q = log_q_norm - 0.5 * z.squaredNorm();
      Eigen::VectorXd xv = Eigen::VectorXd::Zero(N - 1);
      for (int d = 0; d < dims; ++d) xv += cols[traced[d]] * v[d];
      const std::array<double, 2> ra{unif(rng), unif(rng)};
      const std::array<double, 2> rb{unif(rng), unif(rng)};
      double t[2][2];
      for (int m = 0; m < 2; ++m) {
        for (int mp = 0; mp < 2; ++mp) {
          const double a1 = means[m][o1] + hw[0] * ra[0], a2 = means[m][o2] + hw[1] * ra[1];
          const double b1 = means[mp][o1] + hw[0] * rb[0], b2 = means[mp][o2] + hw[1] * rb[1];
          const Eigen::VectorXd xk = xv + cols[o1] * a1 + cols[o2] * a2;
          const Eigen::VectorXd xb = xv + cols[o1] * b1 + cols[o2] * b2;
          t[m][mp] = pref * std::exp(log_amplitude_from_modes(br[m], xk) + log_amplitude_from_modes(br[mp], xb) - log_q);
        }
      }
      const double o = t[0][1] + t[1][0], d = t[0][0] + t[1][1];
      acc.so += o;
      acc.sd += d;
      acc.soo += o * o;
      acc.sdd += d * d;
      acc.sod += o * d;
      ++acc.n;
    }
    streams[s] = acc;
  };

  const int workers = std::clamp(threads, 1, kStreams);
  if (workers == 1) {
    for (int s = 0; s < kStreams; ++s) run_stream(s);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (int s = w; s < kStreams; s += workers) run_stream(s);
      });
    for (auto& th : pool) th.join();
  }

  Sums tot;
  for (const Sums& s : streams) {
    tot.so += s.so;
    tot.sd += s.sd;
    tot.soo += s.soo;
    tot.sdd += s.sdd;
    tot.sod += s.sod;
    tot.n += s.n;
  }
  const double n = static_cast<double>(tot.n);
  const double mo = tot.so / n, md = tot.sd / n;
  const double vo = tot.soo / n - mo * mo, vd = tot.sdd / n - md * md, cod = tot.sod / n - mo * md;
  const double r = mo / md;
  const double var = (vo - 2.0 * r * cod + r * r * vd) / (md * md * n);
  return Estimate{r, std::sqrt(std::max(0.0, var)), seed, tot.n};
}

ResponseEstimate response(int i1, int i2, const IonModel& model, const ModeBasis& basis, std::int64_t samples,
                          std::uint64_t seed) {
  const int N = basis.config().n_dipoles;
  require_small(N);
  if (samples < 2) throw DomainError("too few samples");
  const std::array<DenseBranch, 2> br{make_branch(i1, model, basis), make_branch(i2, model, basis)};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::bernoulli_distribution coin(0.5);
  Eigen::ArrayXd s1 = Eigen::ArrayXd::Zero(N), s2 = s1, s3 = s1, s4 = s1;
  Eigen::VectorXd x(N - 1);
  for (std::int64_t k = 0; k < samples; ++k) {
    const DenseBranch& b = (i1 == i2 || coin(rng)) ? br[0] : br[1];
    for (int a = 0; a < N - 1; ++a) x[a] = b.center[a] + b.x0[a] * gauss(rng);
    const Eigen::ArrayXd phi = (b.u.transpose() * x).array();
    const Eigen::ArrayXd p2 = phi * phi;
    s1 += phi;
    s2 += p2;
    s3 += p2 * phi;
    s4 += p2 * p2;
  }
  const double n = static_cast<double>(samples);
  const Eigen::ArrayXd m1 = s1 / n, m2 = s2 / n, m3 = s3 / n, m4 = s4 / n;
  const Eigen::ArrayXd var = m2 - m1 * m1;
  const Eigen::ArrayXd mu4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1.pow(4);
  ResponseEstimate out;
  out.mean = m1.matrix();
  out.mean_se = (var / n).sqrt().matrix();
  out.sigma = var.sqrt().matrix();
  out.sigma_se = (((mu4 - var * var).max(0.0) / n).sqrt() / (2.0 * var.sqrt())).matrix();
  out.seed = seed;
  out.samples = samples;
  return out;
}

double branch_normalisation(const DenseBranch& branch, int points_per_axis) {
  const int N = branch.n_dipoles;
  require_small(N);
  const int dims = N - 1;
  if (std::pow(points_per_axis, dims) > kGridLimit) throw DomainError("oracle grid exceeds 1e8 points");
  const Eigen::VectorXd mean = branch.site_means();
  const Eigen::MatrixXd cov = branch.site_covariance();
  const auto& rule = quad::gauss_legendre(points_per_axis);
  std::vector<std::vector<double>> x(dims), w(dims);
  for (int d = 0; d < dims; ++d) {
    const double sd = std::sqrt(cov(d + 1, d + 1));
    for (int k = 0; k < points_per_axis; ++k) {
      x[d].push_back(mean[d + 1] + 6.0 * sd * rule.nodes[k]);
      w[d].push_back(6.0 * sd * rule.weights[k]);
    }
  }
  std::vector<Eigen::VectorXd> cols(dims);
  for (int d = 0; d < dims; ++d) cols[d] = reduced_column(branch, d + 1);
  double sum = 0.0;
  std::function<void(int, const Eigen::VectorXd&, double)> rec = [&](int d, const Eigen::VectorXd& xm, double wt) {
    if (d == dims) {
      sum += wt * std::exp(2.0 * log_amplitude_from_modes(branch, xm));
      return;
    }
    for (int k = 0; k < points_per_axis; ++k) rec(d + 1, xm + cols[d] * x[d][k], wt * w[d][k]);
  };
  rec(0, Eigen::VectorXd::Zero(N - 1), 1.0);
  return std::sqrt(static_cast<double>(N)) * sum;
}

}  // namespace qruler::oracle
