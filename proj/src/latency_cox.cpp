#include "curemix/latency_cox.hpp"

#include "curemix/error.hpp"
#include "curemix/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace curemix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sigmoid(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

double softplus(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

// Subjects sorted by decreasing follow-up time; ties are adjacent.
std::vector<std::size_t> descending_order(const SurvivalDataset& ds) {
  std::vector<std::size_t> order(ds.n());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& y = ds.y();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return y(static_cast<Eigen::Index>(a)) > y(static_cast<Eigen::Index>(b));
  });
  return order;
}

void check_weights(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& weights) {
  if (static_cast<std::size_t>(weights.size()) != ds.n())
    throw ConfigError("one weight per subject required");
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    if (!(weights(i) >= 0.0) || !std::isfinite(weights(i)))
      throw NumericalError("weights must be finite and nonnegative");
}

struct PartialTerms {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd hessian;
};

PartialTerms partial_terms(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& weights,
                           const Eigen::Ref<const Eigen::VectorXd>& beta, bool derivatives) {
  check_weights(ds, weights);
  const Eigen::Index q = static_cast<Eigen::Index>(ds.q());
  if (beta.size() != q) throw ConfigError("beta length does not match Z columns");
  const auto& z = ds.z();
  const auto& y = ds.y();
  const Eigen::VectorXd eta = z * beta;
  const double shift = eta.size() ? eta.maxCoeff() : 0.0;

  PartialTerms out;
  out.score = Eigen::VectorXd::Zero(q);
  out.hessian = Eigen::MatrixXd::Zero(q, q);
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(q);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(q, q);

  const auto order = descending_order(ds);
  std::size_t pos = 0;
  while (pos < order.size()) {
    const double t = y(static_cast<Eigen::Index>(order[pos]));
    std::size_t end = pos;
    while (end < order.size() && y(static_cast<Eigen::Index>(order[end])) == t) {
      const auto k = static_cast<Eigen::Index>(order[end]);
      const double r = weights(k) * std::exp(eta(k) - shift);
      s0 += r;
      if (derivatives) {
        s1 += r * z.row(k).transpose();
        s2 += r * z.row(k).transpose() * z.row(k);
      }
      ++end;
    }
    for (std::size_t m = pos; m < end; ++m) {
      const auto i = static_cast<Eigen::Index>(order[m]);
      if (ds.delta()(i) != 1) continue;
      if (!(s0 > 0.0))
        throw NumericalError("empty weighted risk set at event of subject " + std::to_string(i));
      out.loglik += eta(i) - shift - std::log(s0);
      if (derivatives) {
        const Eigen::VectorXd mean = s1 / s0;
        out.score += z.row(i).transpose() - mean;
        out.hessian -= s2 / s0 - mean * mean.transpose();
      }
    }
    pos = end;
  }
  return out;
}

void check_latency_rank(const SurvivalDataset& ds) {
  const Eigen::Index q = static_cast<Eigen::Index>(ds.q());
  if (q == 0) return;
  const Eigen::MatrixXd centered = ds.z().rowwise() - ds.z().colwise().mean();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(centered);
  if (qr.rank() < q)
    throw SingularHessianError("latency covariates are constant or collinear");
}

}  // namespace

double zero_tail_cumhaz(const StepFunction& lambda, double t) {
  if (lambda.empty() || t > lambda.last_time()) return kInf;
  return lambda(t);
}

double uncured_posterior(double incidence_log_odds, double uncured_cumhaz) noexcept {
  if (uncured_cumhaz == kInf) return 0.0;
  return sigmoid(incidence_log_odds - uncured_cumhaz);
}

double g_function(double t, const StepFunction& lambda, const Eigen::Ref<const Eigen::VectorXd>& beta,
                  const Eigen::Ref<const Eigen::VectorXd>& gamma,
                  const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& z, const IncidenceLink& link) {
  const double eta = gamma.dot(x);
  const double cumhaz = zero_tail_cumhaz(lambda, t);
  if (cumhaz == kInf) return 0.0;
  return uncured_posterior(link.log_odds(eta), cumhaz * std::exp(beta.dot(z)));
}

Eigen::VectorXd compute_weights(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& gamma,
                                const Eigen::Ref<const Eigen::VectorXd>& beta, const StepFunction& lambda,
                                const IncidenceLink& link) {
  const Eigen::VectorXd eta_x = ds.x() * gamma;
  const Eigen::VectorXd eta_z = ds.z() * beta;
  Eigen::VectorXd w(static_cast<Eigen::Index>(ds.n()));
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (ds.delta()(j) == 1) {
      w(j) = 1.0;
      continue;
    }
    const double cumhaz = zero_tail_cumhaz(lambda, ds.y()(j));
    w(j) = cumhaz == kInf ? 0.0 : uncured_posterior(link.log_odds(eta_x(j)), cumhaz * std::exp(eta_z(j)));
  }
  return w;
}

double weighted_partial_loglik(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& weights,
                               const Eigen::Ref<const Eigen::VectorXd>& beta) {
  return partial_terms(ds, weights, beta, false).loglik;
}

Eigen::VectorXd weighted_partial_score(const SurvivalDataset& ds,
                                       const Eigen::Ref<const Eigen::VectorXd>& weights,
                                       const Eigen::Ref<const Eigen::VectorXd>& beta) {
  return partial_terms(ds, weights, beta, true).score;
}

Eigen::MatrixXd weighted_partial_hessian(const SurvivalDataset& ds,
                                         const Eigen::Ref<const Eigen::VectorXd>& weights,
                                         const Eigen::Ref<const Eigen::VectorXd>& beta) {
  return partial_terms(ds, weights, beta, true).hessian;
}

PartialFit weighted_partial_fit(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& weights,
                                const Eigen::Ref<const Eigen::VectorXd>& init,
                                const PartialFitOptions& options) {
  if (ds.event_count() == 0) throw DataError("partial likelihood needs at least one event");
  if (options.check_rank) check_latency_rank(ds);
  PartialFit fit;
  fit.beta = init;
  PartialTerms terms = partial_terms(ds, weights, fit.beta, true);
  fit.loglik = terms.loglik;
  fit.gradient_norm = terms.score.size() ? terms.score.lpNorm<Eigen::Infinity>() : 0.0;

  while (fit.gradient_norm >= options.tol && fit.iterations < options.max_iter) {
    ++fit.iterations;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(-terms.hessian);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) break;
    const Eigen::VectorXd step = ldlt.solve(terms.score);
    if (!step.allFinite()) break;
    double scale = 1.0;
    bool improved = false;
    Eigen::VectorXd candidate;
    double cand_ll = 0.0;
    const double noise = 1e-12 * (1.0 + std::abs(fit.loglik));
    for (std::size_t h = 0; h <= options.max_halvings; ++h, scale *= 0.5) {
      candidate = fit.beta + scale * step;
      cand_ll = partial_terms(ds, weights, candidate, false).loglik;
      if (std::isfinite(cand_ll) && cand_ll >= fit.loglik - noise) {
        improved = true;
        break;
      }
    }
    if (!improved) break;
    const bool moved = (candidate - fit.beta).lpNorm<Eigen::Infinity>() > 0.0;
    fit.beta = candidate;
    terms = partial_terms(ds, weights, fit.beta, true);
    fit.loglik = terms.loglik;
    fit.gradient_norm = terms.score.lpNorm<Eigen::Infinity>();
    if (!moved) break;
  }
  fit.converged = fit.gradient_norm < options.tol;
  return fit;
}

std::vector<double> distinct_event_times(const SurvivalDataset& ds) {
  std::vector<double> times;
  for (std::size_t i = 0; i < ds.n(); ++i)
    if (ds.is_event(i)) times.push_back(ds.y()(static_cast<Eigen::Index>(i)));
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

StepFunction breslow_update(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& weights,
                            const Eigen::Ref<const Eigen::VectorXd>& beta) {
  check_weights(ds, weights);
  if (beta.size() != static_cast<Eigen::Index>(ds.q())) throw ConfigError("beta length does not match Z columns");
  const Eigen::VectorXd eta = ds.z() * beta;
  const double shift = eta.size() ? eta.maxCoeff() : 0.0;
  const auto& y = ds.y();
  const auto order = descending_order(ds);

  std::vector<double> times;
  std::vector<double> jumps;
  double s0 = 0.0;
  std::size_t pos = 0;
  while (pos < order.size()) {
    const double t = y(static_cast<Eigen::Index>(order[pos]));
    double events = 0.0;
    while (pos < order.size() && y(static_cast<Eigen::Index>(order[pos])) == t) {
      const auto k = static_cast<Eigen::Index>(order[pos]);
      s0 += weights(k) * std::exp(eta(k) - shift);
      events += ds.delta()(k);
      ++pos;
    }
    if (events == 0.0) continue;
    if (!(s0 > 0.0))
      throw NumericalError("zero weighted risk set at event time " + std::to_string(t));
    const double jump = events / s0 * std::exp(-shift);
    if (!std::isfinite(jump)) throw NumericalError("non-finite hazard jump at time " + std::to_string(t));
    times.push_back(t);
    jumps.push_back(jump);
  }
  std::reverse(times.begin(), times.end());
  std::reverse(jumps.begin(), jumps.end());
  return StepFunction::from_jumps(std::move(times), jumps);
}

LatencyMStep latency_m_step(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& weights,
                            const Eigen::Ref<const Eigen::VectorXd>& beta_init,
                            const PartialFitOptions& options) {
  LatencyMStep step{weighted_partial_fit(ds, weights, beta_init, options), {}};
  step.lambda = breslow_update(ds, weights, step.partial.beta);
  return step;
}

LatencyMStep no_cure_cox(const SurvivalDataset& ds, const PartialFitOptions& options) {
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(ds.n()));
  return latency_m_step(ds, ones, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ds.q())), options);
}

LatencyFit fit_latency(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& gamma_hat,
                       const LatencyOptions& options, const IncidenceLink& link) {
  if (ds.event_count() == 0) throw DataError("latency fit needs at least one event");
  if (gamma_hat.size() != static_cast<Eigen::Index>(ds.p()))
    throw ConfigError("gamma length does not match X columns");
  check_latency_rank(ds);
  PartialFitOptions inner = options.inner;
  inner.check_rank = false;

  LatencyFit fit;
  fit.last_event_time = ds.last_event_time();
  LatencyMStep current = no_cure_cox(ds, inner);
  fit.objective_trace.push_back(
      observed_loglik(ds, gamma_hat, current.partial.beta, current.lambda, LoglikTerms::latency_profile, link));

  bool inner_ok = current.partial.converged;
  while (fit.iterations < options.max_iter) {
    ++fit.iterations;
    const Eigen::VectorXd w = compute_weights(ds, gamma_hat, current.partial.beta, current.lambda, link);
    LatencyMStep next = latency_m_step(ds, w, current.partial.beta, inner);
    inner_ok = next.partial.converged;
    if (!inner_ok) ++fit.inner_failures;
    const double change_beta = next.partial.beta.size()
                                   ? (next.partial.beta - current.partial.beta).lpNorm<Eigen::Infinity>()
                                   : 0.0;
    const double change = std::max(change_beta, StepFunction::sup_distance(next.lambda, current.lambda));
    current = std::move(next);
    fit.objective_trace.push_back(observed_loglik(ds, gamma_hat, current.partial.beta, current.lambda,
                                                  LoglikTerms::latency_profile, link));
    fit.final_change = change;
    if (change < options.tol) {
      fit.converged = inner_ok;
      break;
    }
  }
  fit.beta = current.partial.beta;
  fit.lambda = std::move(current.lambda);
  fit.weights = compute_weights(ds, gamma_hat, fit.beta, fit.lambda, link);
  return fit;
}

double profile_residual(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& gamma,
                        const Eigen::Ref<const Eigen::VectorXd>& beta, const StepFunction& lambda,
                        const IncidenceLink& link) {
  const Eigen::VectorXd w = compute_weights(ds, gamma, beta, lambda, link);
  const StepFunction implied = breslow_update(ds, w, beta);
  double residual = 0.0;
  for (double t : implied.times())
    residual = std::max(residual, std::abs(lambda.jump_at(t) - implied.jump_at(t)));
  // Jumps of `lambda` away from event times are not allowed by the characterization.
  for (double t : lambda.times())
    if (implied.jump_at(t) == 0.0) residual = std::max(residual, std::abs(lambda.jump_at(t)));
  return residual;
}

double observed_loglik(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& gamma,
                       const Eigen::Ref<const Eigen::VectorXd>& beta, const StepFunction& lambda,
                       LoglikTerms terms, const IncidenceLink& link) {
  if (gamma.size() != static_cast<Eigen::Index>(ds.p()) || beta.size() != static_cast<Eigen::Index>(ds.q()))
    throw ConfigError("parameter lengths do not match the dataset");
  const Eigen::VectorXd eta_x = ds.x() * gamma;
  const Eigen::VectorXd eta_z = ds.z() * beta;
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta_x.size(); ++i) {
    const double t = ds.y()(i);
    const double cumhaz = zero_tail_cumhaz(lambda, t);
    if (ds.delta()(i) == 1) {
      const double jump = lambda.jump_at(t);
      if (!(jump > 0.0) || cumhaz == kInf) return -kInf;
      total += std::log(jump) + eta_z(i) - cumhaz * std::exp(eta_z(i));
      if (terms == LoglikTerms::full) total += link.log_prob(eta_x(i));
    } else {
      const double log_cured = link.log_complement(eta_x(i));
      if (cumhaz == kInf) {
        total += log_cured;
      } else {
        // log(1 - phi + phi S_u) = log(1 - phi) + log(1 + odds * S_u)
        total += log_cured + softplus(link.log_odds(eta_x(i)) - cumhaz * std::exp(eta_z(i)));
      }
    }
  }
  return total / static_cast<double>(ds.n());
}

}  // namespace curemix
