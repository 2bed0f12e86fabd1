#include "curemix/pipeline.hpp"

#include "curemix/likelihood.hpp"
#include "curemix/presmoother.hpp"

namespace curemix {

PresmoothResult fit_presmoothing(const SurvivalDataset& ds, const PresmoothOptions& options) {
  const auto [std_ds, meta] = standardize_continuous(ds);
  PresmoothResult out;
  const std::size_t dims = meta.continuous_columns().size();
  if (options.bandwidth) {
    out.bandwidth = options.bandwidth->capped(options.cv.cap);
    out.bandwidth_override = true;
  } else if (dims > 0) {
    CvOptions cv = options.cv;
    cv.workers = options.workers;
    out.bandwidth = cv_bandwidth(std_ds, options.grid, options.seed, cv);
  }
  out.pihat = presmooth_all(std_ds, out.bandwidth, options.workers);
  out.incidence = fit_incidence(out.pihat, std_ds.x(), std::nullopt, options.incidence);
  out.latency = fit_latency(std_ds, out.incidence.gamma, options.latency);

  CureModelFit& fit = out.fit;
  fit.method = Method::presmoothing;
  fit.gamma = destandardize_gamma(out.incidence.gamma, meta);
  fit.beta = out.latency.beta;
  fit.lambda = out.latency.lambda;
  fit.iterations = out.latency.iterations;
  fit.converged = out.incidence.converged && out.latency.converged;
  fit.loglik = observed_loglik(std_ds, out.incidence.gamma, fit.beta, fit.lambda, LoglikTerms::full);
  fit.loglik_trace = out.latency.objective_trace;
  return out;
}

CureModelFit fit_mle(const SurvivalDataset& ds, const MleOptions& options) {
  const auto [std_ds, meta] = standardize_continuous(ds);
  CureModelFit fit = fit_mle_em(std_ds, options);
  fit.gamma = destandardize_gamma(fit.gamma, meta);
  return fit;
}

Eigen::VectorXd stacked_parameters(const CureModelFit& fit) {
  Eigen::VectorXd v(fit.gamma.size() + fit.beta.size());
  v << fit.gamma, fit.beta;
  return v;
}

}  // namespace curemix
