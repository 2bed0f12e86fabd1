#pragma once

#include "curemix/data.hpp"
#include "curemix/kernels.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace curemix {

// Kernel-weighted subdistributions at a query point, evaluated at the distinct
// uncensored times.
struct ConditionalSubdist {
  std::vector<double> event_times;
  std::vector<double> h1_mass;   // weight of subjects with Y == t and an event
  std::vector<double> at_risk;   // weight of subjects with Y >= t
};

struct CureProbEstimate {
  double value = 1.0;
  Eigen::VectorXd x;
  Bandwidth bandwidth;
};

ConditionalSubdist conditional_subdist(const SurvivalDataset& ds,
                                       const Eigen::Ref<const Eigen::VectorXd>& x,
                                       const Bandwidth& b);

// Product-limit (Beran) estimate of the conditional survival at the last event time.
CureProbEstimate estimate_cure_prob(const SurvivalDataset& ds,
                                    const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const Bandwidth& b);

// Cure probability at every sample point.
Eigen::VectorXd presmooth_all(const SurvivalDataset& ds, const Bandwidth& b,
                              std::size_t workers = 1);

}  // namespace curemix
