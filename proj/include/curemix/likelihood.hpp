#pragma once

#include "curemix/data.hpp"
#include "curemix/incidence.hpp"
#include "curemix/step_function.hpp"

#include <Eigen/Dense>

namespace curemix {

enum class LoglikTerms {
  // Criterion maximized over (beta, Lambda) for a fixed incidence: omits the
  // sum of Delta_i log phi(gamma, X_i), which does not depend on (beta, Lambda).
  latency_profile,
  // Full observed-data log-likelihood (divided by n), used by the joint EM.
  full,
};

// Mean observed-data log-likelihood of the logistic/Cox mixture cure model with the
// zero-tail convention. Returns -infinity if some event time carries no jump.
double observed_loglik(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& gamma,
                       const Eigen::Ref<const Eigen::VectorXd>& beta, const StepFunction& lambda,
                       LoglikTerms terms = LoglikTerms::latency_profile,
                       const IncidenceLink& link = logistic_link());

}  // namespace curemix
