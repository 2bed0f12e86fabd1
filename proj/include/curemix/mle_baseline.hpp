#pragma once

#include "curemix/data.hpp"
#include "curemix/incidence.hpp"
#include "curemix/latency_cox.hpp"
#include "curemix/step_function.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace curemix {

enum class Method { presmoothing, mle };

std::string method_name(Method m);

// Estimates of the complete mixture cure model from either estimator.
struct CureModelFit {
  Method method = Method::presmoothing;
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  StepFunction lambda;
  double loglik = 0.0;  // full observed-data log-likelihood / n
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> loglik_trace;
};

struct MleOptions {
  double tol = 1e-7;
  std::size_t max_iter = 500;
  IncidenceOptions incidence{.step_tol = 1e-9};
  PartialFitOptions inner{};
};

// Logistic fit on pseudo-labels that treat plateau-censored subjects as cured and
// everyone else as uncured.
IncidenceFit plateau_label_incidence(const SurvivalDataset& ds, const IncidenceOptions& options = {},
                                     const IncidenceLink& link = logistic_link());

// Joint EM for (gamma, beta, Lambda). Hitting max_iter returns the current
// estimates with converged == false.
CureModelFit fit_mle_em(const SurvivalDataset& ds, const MleOptions& options = {},
                        const IncidenceLink& link = logistic_link());

}  // namespace curemix
