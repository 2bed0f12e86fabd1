#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <string>

namespace curemix {

// Parametric incidence model phi(gamma, x) = link(gamma'x): the probability of
// being uncured. Implementations work on the linear predictor eta.
class IncidenceLink {
 public:
  virtual ~IncidenceLink() = default;
  virtual std::string name() const = 0;
  virtual double prob(double eta) const = 0;
  virtual double log_prob(double eta) const = 0;         // log phi
  virtual double log_complement(double eta) const = 0;   // log(1 - phi)
  // First and second derivative in eta of b*log(phi) + (1-b)*log(1-phi).
  virtual double dloglik(double label, double eta) const = 0;
  virtual double d2loglik(double label, double eta) const = 0;

  double log_odds(double eta) const { return log_prob(eta) - log_complement(eta); }
};

class LogisticLink final : public IncidenceLink {
 public:
  std::string name() const override { return "logistic"; }
  double prob(double eta) const override;
  double log_prob(double eta) const override;
  double log_complement(double eta) const override;
  double dloglik(double label, double eta) const override;
  double d2loglik(double label, double eta) const override;
};

const IncidenceLink& logistic_link();

double logistic_phi(const Eigen::Ref<const Eigen::VectorXd>& gamma,
                    const Eigen::Ref<const Eigen::VectorXd>& x);

// sum_i (1 - pihat_i) log phi_i + pihat_i log(1 - phi_i), with 0 * log 0 = 0.
double soft_label_loglik(const Eigen::Ref<const Eigen::VectorXd>& gamma,
                         const Eigen::Ref<const Eigen::VectorXd>& pihat,
                         const Eigen::Ref<const Eigen::MatrixXd>& x,
                         const IncidenceLink& link = logistic_link());

Eigen::VectorXd soft_label_score(const Eigen::Ref<const Eigen::VectorXd>& gamma,
                                 const Eigen::Ref<const Eigen::VectorXd>& pihat,
                                 const Eigen::Ref<const Eigen::MatrixXd>& x,
                                 const IncidenceLink& link = logistic_link());

Eigen::MatrixXd soft_label_hessian(const Eigen::Ref<const Eigen::VectorXd>& gamma,
                                   const Eigen::Ref<const Eigen::VectorXd>& pihat,
                                   const Eigen::Ref<const Eigen::MatrixXd>& x,
                                   const IncidenceLink& link = logistic_link());

struct IncidenceFit {
  Eigen::VectorXd gamma;
  double loglik = 0.0;
  double gradient_norm = 0.0;  // max-norm of the score
  std::size_t iterations = 0;
  bool converged = false;
};

struct IncidenceOptions {
  double tol = 1e-8;
  std::size_t max_iter = 100;
  std::size_t max_halvings = 60;
  // Skip the rank check (the EM baseline calls this every iteration on the same X).
  bool check_rank = true;
  // When positive, convergence also needs the last Newton step below this max-norm.
  // In the saturated region the score is tiny while the step is not.
  double step_tol = 0.0;
};

// Newton-Raphson with step halving on the soft-label log-likelihood.
IncidenceFit fit_incidence(const Eigen::Ref<const Eigen::VectorXd>& pihat,
                           const Eigen::Ref<const Eigen::MatrixXd>& x,
                           const std::optional<Eigen::VectorXd>& init = std::nullopt,
                           const IncidenceOptions& options = {},
                           const IncidenceLink& link = logistic_link());

}  // namespace curemix
