#include "curemix/incidence.hpp"

#include "curemix/error.hpp"

#include <cmath>
#include <limits>

namespace curemix {

namespace {

// log(1 + exp(v)) without overflow.
double softplus(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

}  // namespace

double LogisticLink::prob(double eta) const {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double LogisticLink::log_prob(double eta) const { return -softplus(-eta); }

double LogisticLink::log_complement(double eta) const { return -softplus(eta); }

double LogisticLink::dloglik(double label, double eta) const { return label - prob(eta); }

double LogisticLink::d2loglik(double, double eta) const {
  const double p = prob(eta);
  return -p * (1.0 - p);
}

const IncidenceLink& logistic_link() {
  static const LogisticLink link;
  return link;
}

double logistic_phi(const Eigen::Ref<const Eigen::VectorXd>& gamma,
                    const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (gamma.size() != x.size()) throw ConfigError("gamma and x lengths differ");
  return logistic_link().prob(gamma.dot(x));
}

namespace {

void check_shapes(const Eigen::Ref<const Eigen::VectorXd>& gamma,
                  const Eigen::Ref<const Eigen::VectorXd>& pihat,
                  const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (gamma.size() != x.cols()) throw ConfigError("gamma length does not match X columns");
  if (pihat.size() != x.rows()) throw ConfigError("pihat length does not match X rows");
}

}  // namespace

double soft_label_loglik(const Eigen::Ref<const Eigen::VectorXd>& gamma,
                         const Eigen::Ref<const Eigen::VectorXd>& pihat,
                         const Eigen::Ref<const Eigen::MatrixXd>& x, const IncidenceLink& link) {
  check_shapes(gamma, pihat, x);
  const Eigen::VectorXd eta = x * gamma;
  double total = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double uncured = 1.0 - pihat(i);
    if (uncured != 0.0) total += uncured * link.log_prob(eta(i));
    if (pihat(i) != 0.0) total += pihat(i) * link.log_complement(eta(i));
  }
  return total;
}

Eigen::VectorXd soft_label_score(const Eigen::Ref<const Eigen::VectorXd>& gamma,
                                 const Eigen::Ref<const Eigen::VectorXd>& pihat,
                                 const Eigen::Ref<const Eigen::MatrixXd>& x,
                                 const IncidenceLink& link) {
  check_shapes(gamma, pihat, x);
  const Eigen::VectorXd eta = x * gamma;
  Eigen::VectorXd d(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) d(i) = link.dloglik(1.0 - pihat(i), eta(i));
  return x.transpose() * d;
}

Eigen::MatrixXd soft_label_hessian(const Eigen::Ref<const Eigen::VectorXd>& gamma,
                                   const Eigen::Ref<const Eigen::VectorXd>& pihat,
                                   const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   const IncidenceLink& link) {
  check_shapes(gamma, pihat, x);
  const Eigen::VectorXd eta = x * gamma;
  Eigen::VectorXd d2(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) d2(i) = link.d2loglik(1.0 - pihat(i), eta(i));
  return x.transpose() * d2.asDiagonal() * x;
}

IncidenceFit fit_incidence(const Eigen::Ref<const Eigen::VectorXd>& pihat,
                           const Eigen::Ref<const Eigen::MatrixXd>& x,
                           const std::optional<Eigen::VectorXd>& init,
                           const IncidenceOptions& options, const IncidenceLink& link) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (pihat.size() != n) throw ConfigError("pihat length does not match X rows");
  if (options.check_rank) {
    if (p >= n) throw SingularHessianError("incidence fit needs p < n");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p) throw SingularHessianError("incidence design matrix is rank deficient");
  }

  IncidenceFit fit;
  fit.gamma = init.value_or(Eigen::VectorXd::Zero(p));
  if (fit.gamma.size() != p) throw ConfigError("initial gamma has the wrong length");
  fit.loglik = soft_label_loglik(fit.gamma, pihat, x, link);
  Eigen::VectorXd score = soft_label_score(fit.gamma, pihat, x, link);
  fit.gradient_norm = score.lpNorm<Eigen::Infinity>();

  const bool use_step = options.step_tol > 0.0;
  double last_step = std::numeric_limits<double>::infinity();
  auto done = [&] { return fit.gradient_norm < options.tol && (!use_step || last_step < options.step_tol); };

  while (!done() && fit.iterations < options.max_iter) {
    ++fit.iterations;
    const Eigen::MatrixXd info = -soft_label_hessian(fit.gamma, pihat, x, link);
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) {
      if (fit.iterations == 1 && options.check_rank)
        throw SingularHessianError("incidence information matrix is not positive definite");
      break;
    }
    const Eigen::VectorXd step = llt.solve(score);
    double scale = 1.0;
    bool improved = false;
    Eigen::VectorXd candidate;
    double cand_ll = 0.0;
    // Near the optimum the true gain falls below the rounding error of the sum.
    const double noise = 1e-12 * (1.0 + std::abs(fit.loglik));
    for (std::size_t h = 0; h <= options.max_halvings; ++h, scale *= 0.5) {
      candidate = fit.gamma + scale * step;
      cand_ll = soft_label_loglik(candidate, pihat, x, link);
      if (std::isfinite(cand_ll) && cand_ll >= fit.loglik - noise) {
        improved = true;
        break;
      }
    }
    if (!improved) break;
    last_step = (candidate - fit.gamma).lpNorm<Eigen::Infinity>();
    const bool moved = last_step > 0.0;
    fit.gamma = candidate;
    fit.loglik = cand_ll;
    score = soft_label_score(fit.gamma, pihat, x, link);
    fit.gradient_norm = score.lpNorm<Eigen::Infinity>();
    if (!moved) break;
  }
  fit.converged = done();
  if (!std::isfinite(fit.loglik)) throw NumericalError("incidence log-likelihood is not finite");
  return fit;
}

}  // namespace curemix
