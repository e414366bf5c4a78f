#pragma once

// Long-time mean dipole displacements and displacement uncertainties.

#include "qruler/ion.hpp"
#include "qruler/lattice.hpp"

#include <Eigen/Dense>

#include <iosfwd>

namespace qruler {

enum class ResponseScenario { single, superposition };

struct ResponseProfile {
  ResponseScenario scenario = ResponseScenario::single;
  int i1 = 0;
  int i2 = 0;              ///< equals i1 for a single site
  Eigen::VectorXd mean;    ///< <phi_n>, indexed by site offset
  Eigen::VectorXd sigma;   ///< delta phi_n, indexed by site offset
  int half = 0;

  double mean_at(int n) const { return mean[n + half]; }
  double sigma_at(int n) const { return sigma[n + half]; }
};

/// Ion localised at site i: <phi_n> = 2 sum_alpha u_{alpha,n} x0 lambda_{alpha,i}; sigma is the
/// free zero-point width and does not depend on lambda. The site must lie at least `edge_margin` sites
/// from both ruler ends.
ResponseProfile response_single(int i, const IonModel& model, const ModeBasis& basis, int edge_margin = 2);

/// Equal-weight superposition of sites i1 and i2 (also valid for the equal mixture).
ResponseProfile response_superposition(int i1, int i2, const IonModel& model, const ModeBasis& basis,
                                       int edge_margin = 2);

/// <phi_{i_l}>_m: mean displacement at site i_l when the ion sits at i_m; l, m in {1, 2}.
/// Sites must lie at least `edge_margin` sites from both ruler ends.
double mean_at_site_given_branch(int l, int m, int i1, int i2, const IonModel& model, const ModeBasis& basis,
                                 int edge_margin = 2);

/// CSV with columns n,mean,sigma.
void write_response(std::ostream& os, const ResponseProfile& profile);

}  // namespace qruler
