#pragma once

#include "curemix/data.hpp"
#include "curemix/incidence.hpp"
#include "curemix/step_function.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace curemix {

// Cumulative baseline hazard under the zero-tail convention: +infinity after the last
// jump time of `lambda` (the largest uncensored time), so S_u is 0 there.
double zero_tail_cumhaz(const StepFunction& lambda, double t);

// E[B | T > t]: posterior probability of being uncured given survival past t, from the
// incidence log-odds and the uncured cumulative hazard Lambda(t) exp(beta'z).
double uncured_posterior(double incidence_log_odds, double uncured_cumhaz) noexcept;

double g_function(double t, const StepFunction& lambda, const Eigen::Ref<const Eigen::VectorXd>& beta,
                  const Eigen::Ref<const Eigen::VectorXd>& gamma,
                  const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& z,
                  const IncidenceLink& link = logistic_link());

// Expected uncured status of every subject: 1 for events, g(Y_j) for censored ones.
Eigen::VectorXd compute_weights(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& gamma,
                                const Eigen::Ref<const Eigen::VectorXd>& beta, const StepFunction& lambda,
                                const IncidenceLink& link = logistic_link());

// Weighted Breslow-ties log partial likelihood and its derivatives.
double weighted_partial_loglik(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& weights,
                               const Eigen::Ref<const Eigen::VectorXd>& beta);
Eigen::VectorXd weighted_partial_score(const SurvivalDataset& ds,
                                       const Eigen::Ref<const Eigen::VectorXd>& weights,
                                       const Eigen::Ref<const Eigen::VectorXd>& beta);
Eigen::MatrixXd weighted_partial_hessian(const SurvivalDataset& ds,
                                         const Eigen::Ref<const Eigen::VectorXd>& weights,
                                         const Eigen::Ref<const Eigen::VectorXd>& beta);

struct PartialFitOptions {
  double tol = 1e-10;
  std::size_t max_iter = 50;
  std::size_t max_halvings = 60;
  bool check_rank = true;
};

struct PartialFit {
  Eigen::VectorXd beta;
  double loglik = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

PartialFit weighted_partial_fit(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& weights,
                                const Eigen::Ref<const Eigen::VectorXd>& init,
                                const PartialFitOptions& options = {});

// Weighted Breslow estimate: jump d_t / sum_{Y_j >= t} w_j exp(beta'Z_j) at every
// distinct uncensored time t.
StepFunction breslow_update(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& weights,
                            const Eigen::Ref<const Eigen::VectorXd>& beta);

// One maximization step for (beta, Lambda) given expected uncured weights. Shared by
// the presmoothing latency fit and the EM baseline.
struct LatencyMStep {
  PartialFit partial;
  StepFunction lambda;
};
LatencyMStep latency_m_step(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& weights,
                            const Eigen::Ref<const Eigen::VectorXd>& beta_init,
                            const PartialFitOptions& options);

struct LatencyOptions {
  double tol = 1e-7;
  std::size_t max_iter = 500;
  PartialFitOptions inner{};
};

struct LatencyFit {
  Eigen::VectorXd beta;
  StepFunction lambda;
  Eigen::VectorXd weights;
  std::size_t iterations = 0;
  bool converged = false;
  double last_event_time = 0.0;
  double final_change = 0.0;
  std::size_t inner_failures = 0;
  // Profile criterion after the initialization and after every iteration.
  std::vector<double> objective_trace;
};

// Cox fit ignoring the cure fraction (all weights 1): the EM starting point.
LatencyMStep no_cure_cox(const SurvivalDataset& ds, const PartialFitOptions& options = {});

// Profiling EM for (beta, Lambda) with the incidence parameter held fixed.
LatencyFit fit_latency(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& gamma_hat,
                       const LatencyOptions& options = {}, const IncidenceLink& link = logistic_link());

// Largest absolute difference between the jumps of `lambda` and the jumps implied by
// the self-consistency equation for the profile maximizer at (beta, gamma).
double profile_residual(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& gamma,
                        const Eigen::Ref<const Eigen::VectorXd>& beta, const StepFunction& lambda,
                        const IncidenceLink& link = logistic_link());

// Distinct uncensored times, ascending.
std::vector<double> distinct_event_times(const SurvivalDataset& ds);

}  // namespace curemix
