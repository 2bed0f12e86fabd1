#include "curemix/inference.hpp"

#include "curemix/error.hpp"
#include "curemix/latency_cox.hpp"
#include "curemix/parallel.hpp"
#include "curemix/rng.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace curemix {

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed, std::uint64_t replicate) {
  RandomStream rng(seed, Purpose::bootstrap, replicate);
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
  return rows;
}

BootstrapResult bootstrap_se(const SurvivalDataset& ds, const Estimator& method, std::size_t B,
                             std::uint64_t seed, std::size_t workers) {
  if (B < 2) throw ConfigError("bootstrap needs B >= 2");
  BootstrapResult out;
  out.B = B;
  out.seed = seed;
  out.point = method(ds).estimate;
  const Eigen::Index k = out.point.size();

  std::vector<std::optional<Eigen::VectorXd>> slots(B);
  parallel_for(B, workers, [&](std::size_t r) {
    const auto rows = bootstrap_indices(ds.n(), seed, r);
    try {
      const Refit refit = method(ds.subset(rows));
      if (refit.converged && refit.estimate.size() == k && refit.estimate.allFinite())
        slots[r] = refit.estimate;
    } catch (const Error&) {
    }
  });

  for (std::size_t r = 0; r < B; ++r)
    if (slots[r]) out.replicates.push_back(r);
  out.failures = B - out.replicates.size();
  if (out.replicates.empty()) throw InferenceError("every bootstrap resample failed");

  const auto m = static_cast<Eigen::Index>(out.replicates.size());
  out.estimates.resize(m, k);
  for (Eigen::Index i = 0; i < m; ++i) out.estimates.row(i) = slots[out.replicates[static_cast<std::size_t>(i)]]->transpose();

  out.se = Eigen::VectorXd::Zero(k);
  if (m >= 2) {
    const Eigen::RowVectorXd mean = out.estimates.colwise().mean();
    const Eigen::MatrixXd centered = out.estimates.rowwise() - mean;
    out.se = (centered.colwise().squaredNorm() / static_cast<double>(m - 1)).cwiseSqrt().transpose();
  }
  out.pvalues.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    if (out.se(j) > 0.0)
      out.pvalues(j) = wald_test(out.point(j), out.se(j));
    else
      out.pvalues(j) = out.point(j) == 0.0 ? 1.0 : 0.0;
  }
  return out;
}

double wald_test(double estimate, double se) {
  if (!(se > 0.0) || !std::isfinite(se)) throw InferenceError("Wald test needs a positive standard error");
  return std::erfc(std::abs(estimate / se) / std::sqrt(2.0));
}

double predicted_weight(const CureModelFit& fit, const Subject& subject, const IncidenceLink& link) {
  if (!fit.converged) throw InferenceError("prediction needs a converged fit");
  if (subject.delta == 1) return 1.0;
  const double cumhaz = zero_tail_cumhaz(fit.lambda, subject.y);
  if (std::isinf(cumhaz)) return 0.0;
  return uncured_posterior(link.log_odds(fit.gamma.dot(subject.x)), cumhaz * std::exp(fit.beta.dot(subject.z)));
}

double prediction_error(const CureModelFit& fit, const SurvivalDataset& test, PePairing pairing,
                        const IncidenceLink& link) {
  if (!fit.converged) throw InferenceError("prediction needs a converged fit");
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto term = [](double weight, double log_value) {
    if (weight == 0.0) return 0.0;
    return weight * log_value;
  };
  double total = 0.0;
  for (std::size_t j = 0; j < test.n(); ++j) {
    const Subject s = test.subject(j);
    const double w = predicted_weight(fit, s, link);
    const double eta = fit.gamma.dot(s.x);
    const double log_phi = link.log_prob(eta);
    const double log_1m = link.log_complement(eta);
    const double contrib = pairing == PePairing::as_displayed ? term(w, log_1m) + term(1.0 - w, log_phi)
                                                              : term(w, log_phi) + term(1.0 - w, log_1m);
    if (std::isinf(contrib)) return inf;
    total -= contrib;
  }
  return total;
}

}  // namespace curemix
