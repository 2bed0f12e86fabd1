#pragma once

#include "curemix/data.hpp"
#include "curemix/step_function.hpp"

#include <Eigen/Dense>

#include <map>

namespace curemix {

// Product-limit survival curve: 1 before the first event, one jump per distinct
// uncensored time.
StepFunction kaplan_meier(const Eigen::Ref<const Eigen::VectorXd>& times,
                          const Eigen::Ref<const Eigen::VectorXi>& deltas);

// One curve per distinct value of `groups`.
std::map<double, StepFunction> kaplan_meier_by_group(const Eigen::Ref<const Eigen::VectorXd>& times,
                                                     const Eigen::Ref<const Eigen::VectorXi>& deltas,
                                                     const Eigen::Ref<const Eigen::VectorXd>& groups);

// Share of subjects followed beyond the largest uncensored time.
double plateau_fraction(const SurvivalDataset& ds);

}  // namespace curemix
