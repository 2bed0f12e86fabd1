#pragma once

#include "curemix/data.hpp"
#include "curemix/incidence.hpp"
#include "curemix/mle_baseline.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace curemix {

// Parameter vector produced by an estimator on one dataset, with its convergence flag.
struct Refit {
  Eigen::VectorXd estimate;
  bool converged = true;
  bool latency_converged = true;
};

using Estimator = std::function<Refit(const SurvivalDataset&)>;

struct BootstrapResult {
  Eigen::VectorXd point;          // estimate on the original sample
  Eigen::MatrixXd estimates;      // one row per successful resample
  std::vector<std::size_t> replicates;  // replicate index of each row
  Eigen::VectorXd se;
  Eigen::VectorXd pvalues;
  std::size_t B = 0;
  std::uint64_t seed = 0;
  std::size_t failures = 0;
};

// Row indices of bootstrap replicate r: n draws with replacement from the stream
// (seed, bootstrap, r).
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed, std::uint64_t replicate);

// Naive bootstrap. Resamples whose refit throws or does not converge are dropped and
// counted in `failures`.
BootstrapResult bootstrap_se(const SurvivalDataset& ds, const Estimator& method, std::size_t B,
                             std::uint64_t seed, std::size_t workers = 1);

// Two-sided normal p-value of estimate / se.
double wald_test(double estimate, double se);

// Posterior probability of being uncured for a (possibly new) subject under `fit`,
// with the zero-tail rule after the last jump of the fitted hazard.
double predicted_weight(const CureModelFit& fit, const Subject& subject,
                        const IncidenceLink& link = logistic_link());

enum class PePairing {
  as_displayed,  // W with log(1 - phi), (1 - W) with log(phi)
  flipped,       // W with log(phi), (1 - W) with log(1 - phi)
};

// Prediction error of the incidence on a test sample; +infinity when a log of zero
// meets a nonzero weight.
double prediction_error(const CureModelFit& fit, const SurvivalDataset& test,
                        PePairing pairing = PePairing::as_displayed,
                        const IncidenceLink& link = logistic_link());

}  // namespace curemix
