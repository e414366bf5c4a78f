#include "qruler/response.hpp"

#include "qruler/csv.hpp"
#include "qruler/error.hpp"

#include <ostream>

namespace qruler {

namespace {

// Column n of u scaled by x0: w_{alpha}(n) = u_{alpha,n} x0_alpha.
Eigen::MatrixXd weighted_modes(const ModeBasis& basis) {
  return basis.x0s().asDiagonal() * basis.u_matrix();
}

Eigen::VectorXd zero_point_sigma(const ModeBasis& basis) {
  return weighted_modes(basis).array().square().colwise().sum().sqrt().transpose();
}

}  // namespace

ResponseProfile response_single(int i, const IonModel& model, const ModeBasis& basis, int edge_margin) {
  require_edge_safe(basis, i, edge_margin);
  ResponseProfile p;
  p.scenario = ResponseScenario::single;
  p.i1 = p.i2 = i;
  p.half = basis.half();
  const Eigen::MatrixXd w = weighted_modes(basis);
  p.mean = 2.0 * w.transpose() * model.site_couplings(i);
  p.sigma = zero_point_sigma(basis);
  return p;
}

ResponseProfile response_superposition(int i1, int i2, const IonModel& model, const ModeBasis& basis,
                                       int edge_margin) {
  require_edge_safe(basis, i1, edge_margin);
  require_edge_safe(basis, i2, edge_margin);
  ResponseProfile p;
  p.scenario = ResponseScenario::superposition;
  p.i1 = i1;
  p.i2 = i2;
  p.half = basis.half();
  const Eigen::MatrixXd w = weighted_modes(basis);
  const Eigen::VectorXd l1 = model.site_couplings(i1);
  const Eigen::VectorXd l2 = model.site_couplings(i2);
  p.mean = w.transpose() * (l1 + l2);
  const Eigen::VectorXd spread = w.transpose() * (l1 - l2);
  p.sigma = (zero_point_sigma(basis).array().square() + spread.array().square()).sqrt();
  return p;
}

double mean_at_site_given_branch(int l, int m, int i1, int i2, const IonModel& model, const ModeBasis& basis,
                                 int edge_margin) {
  if ((l != 1 && l != 2) || (m != 1 && m != 2)) throw DomainError("branch labels l, m must be 1 or 2");
  require_edge_safe(basis, i1, edge_margin);
  require_edge_safe(basis, i2, edge_margin);
  const int site = l == 1 ? i1 : i2;
  const int ion = m == 1 ? i1 : i2;
  double sum = 0.0;
  for (int alpha = 1; alpha <= basis.mode_count(); ++alpha)
    sum += basis.u(alpha, site) * basis.x0(alpha) * model.coupling(alpha, ion);
  return 2.0 * sum;
}

void write_response(std::ostream& os, const ResponseProfile& profile) {
  os << "n,mean,sigma\n";
  for (Eigen::Index k = 0; k < profile.mean.size(); ++k) {
    os << (static_cast<int>(k) - profile.half) << ',' << format_number(profile.mean[k]) << ','
       << format_number(profile.sigma[k]) << '\n';
  }
}

}  // namespace qruler
