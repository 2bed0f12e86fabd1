#pragma once

#include "curemix/data.hpp"
#include "curemix/inference.hpp"
#include "curemix/mle_baseline.hpp"
#include "curemix/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace curemix {

enum class CovariateRecipe { model1, model2, model3, model4, demo };
enum class CensoringFamily { exponential, weibull_ph };
enum class LatencyVariant { truncated, no_jump };

struct SimulationScenario {
  std::string key;  // "m1/s1/c1", "m3-nojump/s1/c2", "demo/s1/c1", ...
  std::string model;
  int scenario = 1;
  int cens_level = 1;
  CovariateRecipe recipe = CovariateRecipe::model1;
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  double rho = 1.75;
  double mu = 1.5;
  CensoringFamily censoring = CensoringFamily::exponential;
  double lambda_c = 0.1;  // exponential rate
  double nu = 1.0;        // Weibull-PH censoring scale multiplier
  double beta_c = 1.0;    // Weibull-PH censoring coefficient
  LatencyVariant variant = LatencyVariant::truncated;
  double tau0 = 4.0;
  double tau = 6.0;
  std::size_t n = 200;
  // Calibration targets for the censoring rate and plateau share; NaN when none.
  double target_censoring_rate = std::numeric_limits<double>::quiet_NaN();
  double target_plateau = std::numeric_limits<double>::quiet_NaN();

  void validate() const;
  std::size_t p() const { return static_cast<std::size_t>(gamma.size()); }
  std::size_t q() const { return static_cast<std::size_t>(beta.size()); }
};

const std::vector<SimulationScenario>& scenario_registry();
SimulationScenario find_scenario(const std::string& key);
std::string scenario_key(const std::string& model, int scenario, int cens_level);

// Inverse-CDF draw of an uncured event time from S_u(t) = exp(-mu t^rho e^linpred).
// The truncated variant puts the mass beyond tau0 at tau0; the no-jump variant draws
// from the distribution conditioned on [0, tau0].
double truncated_weibull_ph_sample(double rho, double mu, double linpred, double tau0, double u,
                                   LatencyVariant variant = LatencyVariant::truncated);

// Dataset of size scenario.n for replication `replicate`.
SurvivalDataset generate(const SimulationScenario& scenario, std::uint64_t seed, std::uint64_t replicate);

// Study-level seed for a per-replication consumer (e.g. the bandwidth search).
std::uint64_t derive_seed(std::uint64_t seed, Purpose purpose, std::uint64_t replicate);

struct StudyMethod {
  Method method = Method::presmoothing;
  std::function<Refit(const SurvivalDataset&, std::size_t replicate)> fit;
};

// Estimators used by the study: presmoothing with a CV bandwidth per replication and
// the joint EM baseline.
StudyMethod presmoothing_method(std::uint64_t seed);
StudyMethod mle_method();

struct TrimmedSummary {
  double mean = 0.0;
  double bias = 0.0;
  double variance = 0.0;
  double mse = 0.0;
  std::size_t used = 0;
};

// Drops floor(trim * m) values from each end, then reports bias, variance (m - 1
// denominator) and MSE = bias^2 + variance.
TrimmedSummary trimmed_summary(std::vector<double> values, double truth, double trim = 0.01);

struct ParameterSummary {
  std::string name;
  double truth = 0.0;
  TrimmedSummary stats;
};

struct MethodSummary {
  Method method = Method::presmoothing;
  std::vector<ParameterSummary> parameters;
  std::size_t nonconverged = 0;
  std::size_t latency_nonconverged = 0;
  std::size_t failures = 0;  // estimator threw; excluded from the statistics
  Eigen::MatrixXd estimates;  // reps x (p+q); NaN rows for failures
  std::vector<char> converged;
};

struct SimulationReport {
  std::string scenario_key;
  std::size_t reps = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double trim_fraction = 0.01;
  std::vector<MethodSummary> methods;

  const MethodSummary& of(Method m) const;
};

struct StudyOptions {
  double trim = 0.01;
  std::size_t workers = 1;
};

SimulationReport run_study(const SimulationScenario& scenario, std::size_t reps, std::uint64_t seed,
                           const std::vector<StudyMethod>& methods, const StudyOptions& options = {});

// One line per method and parameter.
std::string report_csv(const SimulationReport& report);

}  // namespace curemix
