#include "curemix/mle_baseline.hpp"

#include "curemix/error.hpp"
#include "curemix/likelihood.hpp"

#include <algorithm>
#include <string>

namespace curemix {

std::string method_name(Method m) { return m == Method::mle ? "mle" : "presmoothing"; }

IncidenceFit plateau_label_incidence(const SurvivalDataset& ds, const IncidenceOptions& options,
                                     const IncidenceLink& link) {
  const double last = ds.last_event_time();
  Eigen::VectorXd cured(static_cast<Eigen::Index>(ds.n()));
  for (Eigen::Index i = 0; i < cured.size(); ++i)
    cured(i) = (ds.delta()(i) == 0 && ds.y()(i) > last) ? 1.0 : 0.0;
  return fit_incidence(cured, ds.x(), std::nullopt, options, link);
}

CureModelFit fit_mle_em(const SurvivalDataset& ds, const MleOptions& options, const IncidenceLink& link) {
  if (ds.event_count() == 0) throw DataError("EM needs at least one event");
  IncidenceOptions inc = options.incidence;
  PartialFitOptions inner = options.inner;

  CureModelFit fit;
  fit.method = Method::mle;
  fit.gamma = plateau_label_incidence(ds, inc, link).gamma;
  LatencyMStep latency = no_cure_cox(ds, inner);
  inc.check_rank = false;
  inner.check_rank = false;
  fit.beta = latency.partial.beta;
  fit.lambda = latency.lambda;
  fit.loglik_trace.push_back(observed_loglik(ds, fit.gamma, fit.beta, fit.lambda, LoglikTerms::full, link));

  while (fit.iterations < options.max_iter) {
    ++fit.iterations;
    try {
      const Eigen::VectorXd w = compute_weights(ds, fit.gamma, fit.beta, fit.lambda, link);
      const Eigen::VectorXd cured = Eigen::VectorXd::Ones(w.size()) - w;
      const IncidenceFit incidence = fit_incidence(cured, ds.x(), fit.gamma, inc, link);
      latency = latency_m_step(ds, w, fit.beta, inner);

      double change = (incidence.gamma - fit.gamma).lpNorm<Eigen::Infinity>();
      if (fit.beta.size())
        change = std::max(change, (latency.partial.beta - fit.beta).lpNorm<Eigen::Infinity>());
      change = std::max(change, StepFunction::sup_distance(latency.lambda, fit.lambda));

      fit.gamma = incidence.gamma;
      fit.beta = latency.partial.beta;
      fit.lambda = latency.lambda;
      fit.loglik_trace.push_back(
          observed_loglik(ds, fit.gamma, fit.beta, fit.lambda, LoglikTerms::full, link));
      if (change < options.tol && incidence.converged && latency.partial.converged) {
        fit.converged = true;
        break;
      }
    } catch (const NumericalError& e) {
      throw NumericalError("EM iteration " + std::to_string(fit.iterations) + ": " + e.what());
    }
  }
  fit.loglik = fit.loglik_trace.back();
  return fit;
}

}  // namespace curemix
