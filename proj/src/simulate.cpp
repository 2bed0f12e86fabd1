#include "curemix/simulate.hpp"

#include "curemix/error.hpp"
#include "curemix/parallel.hpp"
#include "curemix/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

namespace curemix {

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

struct Level {
  double param;
  double rate;
  double plateau;
};

std::vector<SimulationScenario> build_registry() {
  std::vector<SimulationScenario> rows;
  auto add = [&](const std::string& model, int s, CovariateRecipe recipe, Eigen::VectorXd gamma,
                 Eigen::VectorXd beta, double tau0, double tau, CensoringFamily family,
                 std::initializer_list<Level> levels) {
    int c = 1;
    for (const Level& lv : levels) {
      SimulationScenario sc;
      sc.model = model;
      sc.scenario = s;
      sc.cens_level = c;
      sc.key = scenario_key(model, s, c);
      sc.recipe = recipe;
      sc.gamma = gamma;
      sc.beta = beta;
      sc.tau0 = tau0;
      sc.tau = tau;
      sc.censoring = family;
      if (family == CensoringFamily::exponential)
        sc.lambda_c = lv.param;
      else
        sc.nu = lv.param;
      sc.target_censoring_rate = lv.rate;
      sc.target_plateau = lv.plateau;
      rows.push_back(std::move(sc));
      ++c;
    }
  };
  constexpr auto nan = std::numeric_limits<double>::quiet_NaN();
  const auto expo = CensoringFamily::exponential;
  const auto weib = CensoringFamily::weibull_ph;

  add("1", 1, CovariateRecipe::model1, vec({1.75, 2}), vec({1}), 4, 6, expo,
      {{0.1, 0.25, 0.15}, {0.2, 0.30, 0.11}, {0.3, 0.35, 0.09}});
  add("1", 2, CovariateRecipe::model1, vec({1, 1.5}), vec({1}), 4, 6, expo,
      {{0.1, 0.34, 0.22}, {0.25, 0.40, 0.15}, {0.4, 0.46, 0.10}});
  add("1", 3, CovariateRecipe::model1, vec({0.1, 5}), vec({1}), 4, 6, expo,
      {{0.2, 0.54, 0.32}, {0.4, 0.59, 0.23}, {0.7, 0.65, 0.15}});

  add("2", 1, CovariateRecipe::model2, vec({1.5, 0.5}), vec({1}), 10, 15, weib,
      {{1.0 / 15, 0.25, 0.07}, {1.0 / 7, 0.30, 0.04}, {1.0 / 4, 0.35, 0.02}});
  add("2", 2, CovariateRecipe::model2, vec({1, 1}), vec({1}), 10, 15, weib,
      {{1.0 / 13, 0.35, 0.14}, {1.0 / 10, 0.40, 0.09}, {5.0 / 18, 0.45, 0.06}});
  add("2", 3, CovariateRecipe::model2, vec({-0.1, 5}), vec({1}), 10, 15, weib,
      {{1.0 / 9, 0.56, 0.38}, {1.0 / 4, 0.60, 0.30}, {2.0 / 5, 0.65, 0.25}});

  add("3", 1, CovariateRecipe::model3, vec({0.5, -1, 2.5, 1.2}), vec({-1, 0.5, 1.5}), 30, 35, expo,
      {{0.12, 0.25, 0.10}, {0.25, 0.30, 0.06}, {0.45, 0.35, 0.04}});
  add("3", 2, CovariateRecipe::model3, vec({1, 2, 1.8, 0.5}), vec({1, 0.5, 2}), 6, 8, expo,
      {{0.2, 0.35, 0.16}, {0.5, 0.40, 0.09}, {0.8, 0.45, 0.06}});
  add("3", 3, CovariateRecipe::model3, vec({-0.8, 1.3, 1.5, -0.2}), vec({1, -0.1, 0.8}), 5, 7, expo,
      {{0.3, 0.55, 0.24}, {0.7, 0.59, 0.14}, {1.3, 0.65, 0.08}});

  add("4", 1, CovariateRecipe::model4, vec({0.6, -1, 1, 2.5, 1.2}), vec({-0.8, 0.3, 0.5}), 14, 16, expo,
      {{0.1, 0.25, 0.11}, {0.22, 0.30, 0.07}, {0.35, 0.35, 0.05}});
  add("4", 2, CovariateRecipe::model4, vec({0.45, 0.5, 2, 1, 0.5}), vec({1, 0.5, 2}), 18, 20, expo,
      {{0.15, 0.35, 0.11}, {0.35, 0.40, 0.07}, {0.6, 0.45, 0.05}});
  add("4", 3, CovariateRecipe::model4, vec({-0.22, 0.3, -0.4, 0.5, -0.2}), vec({0.4, -0.1, 0.5}), 6, 8,
      expo, {{0.2, 0.55, 0.30}, {0.4, 0.59, 0.20}, {0.7, 0.65, 0.12}});

  const std::size_t nojump_begin = rows.size();
  add("3-nojump", 1, CovariateRecipe::model3, vec({0.5, -1, 2.5, 1.2}), vec({-1, 0.5, 1.5}), 15, 20,
      expo, {{0.12, nan, nan}, {0.25, nan, nan}, {0.45, nan, nan}});
  for (std::size_t k = nojump_begin; k < rows.size(); ++k) rows[k].variant = LatencyVariant::no_jump;

  add("demo", 1, CovariateRecipe::demo, vec({0.6, -1, 1, 2.5, 1.2}), vec({-0.8, 0.9, 0.5}), 14, 16, expo,
      {{0.22, nan, nan}});
  rows.back().n = 100;
  return rows;
}

double logistic(double eta) {
  return eta >= 0.0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta));
}

}  // namespace

void SimulationScenario::validate() const {
  if (gamma.size() < 1) throw ConfigError(key + ": gamma must include an intercept");
  if (!(rho > 0.0) || !(mu > 0.0)) throw ConfigError(key + ": Weibull shape and scale must be positive");
  if (!(tau0 > 0.0) || !(tau0 < tau)) throw ConfigError(key + ": need 0 < tau0 < tau");
  if (censoring == CensoringFamily::exponential && !(lambda_c > 0.0))
    throw ConfigError(key + ": censoring rate must be positive");
  if (censoring == CensoringFamily::weibull_ph && !(nu > 0.0))
    throw ConfigError(key + ": censoring scale multiplier must be positive");
  if (n < 2) throw ConfigError(key + ": sample size must be at least 2");
  std::size_t px = 0;
  std::size_t qz = 0;
  switch (recipe) {
    case CovariateRecipe::model1:
    case CovariateRecipe::model2: px = 2; qz = 1; break;
    case CovariateRecipe::model3: px = 4; qz = 3; break;
    case CovariateRecipe::model4:
    case CovariateRecipe::demo: px = 5; qz = 3; break;
  }
  if (p() != px || q() != qz) throw ConfigError(key + ": parameter lengths do not match the covariate recipe");
}

const std::vector<SimulationScenario>& scenario_registry() {
  static const std::vector<SimulationScenario> registry = build_registry();
  return registry;
}

std::string scenario_key(const std::string& model, int scenario, int cens_level) {
  return (model == "demo" ? "demo" : "m" + model) + "/s" + std::to_string(scenario) + "/c" +
         std::to_string(cens_level);
}

SimulationScenario find_scenario(const std::string& key) {
  for (const auto& sc : scenario_registry())
    if (sc.key == key) return sc;
  throw ConfigError("unknown scenario '" + key + "'");
}

double truncated_weibull_ph_sample(double rho, double mu, double linpred, double tau0, double u,
                                   LatencyVariant variant) {
  const double rate = mu * std::exp(linpred);
  if (variant == LatencyVariant::truncated) {
    const double t = std::pow(-std::log(u) / rate, 1.0 / rho);
    return std::min(t, tau0);
  }
  // Solve F(t) = 1 - u for F(t) = (1 - exp(-rate t^rho)) / (1 - exp(-rate tau0^rho)).
  const double mass = -std::expm1(-rate * std::pow(tau0, rho));
  const double t = std::pow(-std::log1p(-(1.0 - u) * mass) / rate, 1.0 / rho);
  return std::min(t, tau0);
}

SurvivalDataset generate(const SimulationScenario& sc, std::uint64_t seed, std::uint64_t replicate) {
  sc.validate();
  RandomStream cov(seed, Purpose::covariates, replicate);
  RandomStream cure(seed, Purpose::cure_status, replicate);
  RandomStream lat(seed, Purpose::latency, replicate);
  RandomStream cens(seed, Purpose::censoring, replicate);

  const auto n = static_cast<Eigen::Index>(sc.n);
  const auto p = static_cast<Eigen::Index>(sc.p());
  const auto q = static_cast<Eigen::Index>(sc.q());
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(n, p);
  Eigen::MatrixXd z(n, q);
  Eigen::VectorXd y(n);
  Eigen::VectorXi delta(n);
  CovariateMeta meta = CovariateMeta::unnamed(sc.p() - 1, sc.q());

  for (Eigen::Index i = 0; i < n; ++i) {
    switch (sc.recipe) {
      case CovariateRecipe::model1:
        x(i, 1) = cov.uniform(-1.0, 1.0);
        z(i, 0) = x(i, 1);
        break;
      case CovariateRecipe::model2:
        x(i, 1) = cov.normal();
        z(i, 0) = x(i, 1);
        break;
      case CovariateRecipe::model3:
        x(i, 1) = cov.normal(0.0, 2.0);
        x(i, 2) = cov.bernoulli(0.6) ? 1.0 : 0.0;
        x(i, 3) = cov.bernoulli(0.4) ? 1.0 : 0.0;
        z(i, 0) = x(i, 1);
        z(i, 1) = cov.uniform(-3.0, 3.0);
        z(i, 2) = x(i, 2);
        break;
      case CovariateRecipe::model4:
        x(i, 1) = cov.normal(0.0, 2.0);
        x(i, 2) = cov.uniform(-1.0, 1.0);
        x(i, 3) = cov.bernoulli(0.6) ? 1.0 : 0.0;
        x(i, 4) = cov.bernoulli(0.4) ? 1.0 : 0.0;
        z(i, 0) = x(i, 1);
        z(i, 1) = cov.uniform(-3.0, 3.0);
        z(i, 2) = x(i, 3);
        break;
      case CovariateRecipe::demo:
        x(i, 1) = cov.normal(0.0, 2.0);
        x(i, 2) = cov.uniform(-1.0, 1.0);
        x(i, 3) = cov.bernoulli(0.8) ? 1.0 : 0.0;
        x(i, 4) = cov.bernoulli(0.2) ? 1.0 : 0.0;
        z(i, 0) = x(i, 1);
        z(i, 1) = x(i, 3);
        z(i, 2) = x(i, 4);
        break;
    }

    const bool uncured = cure.bernoulli(logistic(sc.gamma.dot(x.row(i).transpose())));
    const double u_lat = lat.uniform();
    const double t = uncured ? truncated_weibull_ph_sample(sc.rho, sc.mu, sc.beta.dot(z.row(i).transpose()),
                                                           sc.tau0, u_lat, sc.variant)
                             : std::numeric_limits<double>::infinity();
    double c;
    if (sc.censoring == CensoringFamily::exponential) {
      c = cens.exponential(sc.lambda_c);
    } else {
      const double rate = sc.nu * sc.mu * std::exp(sc.beta_c * x(i, 1));
      c = std::pow(-std::log(cens.uniform()) / rate, 1.0 / sc.rho);
    }
    c = std::min(c, sc.tau);
    y(i) = std::min(t, c);
    delta(i) = t <= c ? 1 : 0;
  }

  if (sc.recipe == CovariateRecipe::model3) {
    meta.x_kinds[1] = meta.x_kinds[2] = CovariateKind::discrete;
  } else if (sc.recipe == CovariateRecipe::model4 || sc.recipe == CovariateRecipe::demo) {
    meta.x_kinds[2] = meta.x_kinds[3] = CovariateKind::discrete;
  }
  return SurvivalDataset(std::move(y), std::move(delta), std::move(x), std::move(z), std::move(meta));
}

std::uint64_t derive_seed(std::uint64_t seed, Purpose purpose, std::uint64_t replicate) {
  RandomStream rng(seed, purpose, replicate);
  return rng();
}

StudyMethod presmoothing_method(std::uint64_t seed) {
  return {Method::presmoothing, [seed](const SurvivalDataset& ds, std::size_t replicate) {
            PresmoothOptions options;
            options.seed = derive_seed(seed, Purpose::bandwidth_search, replicate);
            const PresmoothResult r = fit_presmoothing(ds, options);
            return Refit{stacked_parameters(r.fit), r.fit.converged, r.latency.converged};
          }};
}

StudyMethod mle_method() {
  return {Method::mle, [](const SurvivalDataset& ds, std::size_t) {
            const CureModelFit fit = fit_mle(ds);
            return Refit{stacked_parameters(fit), fit.converged, true};
          }};
}

TrimmedSummary trimmed_summary(std::vector<double> values, double truth, double trim) {
  if (!(trim >= 0.0 && trim < 0.5)) throw ConfigError("trim fraction must lie in [0, 0.5)");
  std::sort(values.begin(), values.end());
  const auto drop = static_cast<std::size_t>(std::floor(trim * static_cast<double>(values.size())));
  TrimmedSummary s;
  if (values.size() <= 2 * drop) return s;
  const auto first = values.begin() + static_cast<std::ptrdiff_t>(drop);
  const auto last = values.end() - static_cast<std::ptrdiff_t>(drop);
  s.used = static_cast<std::size_t>(last - first);
  double sum = 0.0;
  for (auto it = first; it != last; ++it) sum += *it;
  s.mean = sum / static_cast<double>(s.used);
  double ss = 0.0;
  for (auto it = first; it != last; ++it) ss += (*it - s.mean) * (*it - s.mean);
  s.variance = s.used > 1 ? ss / static_cast<double>(s.used - 1) : 0.0;
  s.bias = s.mean - truth;
  s.mse = s.bias * s.bias + s.variance;
  return s;
}

const MethodSummary& SimulationReport::of(Method m) const {
  for (const auto& ms : methods)
    if (ms.method == m) return ms;
  throw ConfigError("method " + method_name(m) + " was not part of the study");
}

SimulationReport run_study(const SimulationScenario& scenario, std::size_t reps, std::uint64_t seed,
                           const std::vector<StudyMethod>& methods, const StudyOptions& options) {
  scenario.validate();
  if (reps < 10) throw ConfigError("a study needs at least 10 replications");
  if (methods.empty()) throw ConfigError("a study needs at least one method");
  const std::size_t k = scenario.p() + scenario.q();
  const std::size_t nm = methods.size();

  // slot[r * nm + m]: empty when the estimator threw.
  std::vector<std::optional<Refit>> slots(reps * nm);
  parallel_for(reps, options.workers, [&](std::size_t r) {
    std::optional<SurvivalDataset> ds;
    try {
      ds.emplace(generate(scenario, seed, r));
    } catch (const DataError&) {
      return;
    }
    for (std::size_t m = 0; m < nm; ++m) {
      try {
        slots[r * nm + m] = methods[m].fit(*ds, r);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error&) {
      }
    }
  });

  SimulationReport report;
  report.scenario_key = scenario.key;
  report.reps = reps;
  report.n = scenario.n;
  report.seed = seed;
  report.trim_fraction = options.trim;
  Eigen::VectorXd truth(static_cast<Eigen::Index>(k));
  truth << scenario.gamma, scenario.beta;

  for (std::size_t m = 0; m < nm; ++m) {
    MethodSummary ms;
    ms.method = methods[m].method;
    ms.estimates = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(reps), static_cast<Eigen::Index>(k),
                                             std::numeric_limits<double>::quiet_NaN());
    ms.converged.assign(reps, 0);
    std::vector<std::vector<double>> columns(k);
    for (std::size_t r = 0; r < reps; ++r) {
      const auto& slot = slots[r * nm + m];
      if (!slot || !slot->estimate.allFinite()) {
        ++ms.failures;
        continue;
      }
      if (static_cast<std::size_t>(slot->estimate.size()) != k)
        throw ConfigError("method " + method_name(ms.method) + " returned a parameter vector that does not match scenario " + scenario.key);
      ms.estimates.row(static_cast<Eigen::Index>(r)) = slot->estimate.transpose();
      ms.converged[r] = slot->converged ? 1 : 0;
      if (!slot->converged) ++ms.nonconverged;
      if (!slot->latency_converged) ++ms.latency_nonconverged;
      for (std::size_t j = 0; j < k; ++j) columns[j].push_back(slot->estimate(static_cast<Eigen::Index>(j)));
    }
    for (std::size_t j = 0; j < k; ++j) {
      ParameterSummary ps;
      ps.name = j < scenario.p() ? "gamma" + std::to_string(j + 1) : "beta" + std::to_string(j - scenario.p() + 1);
      ps.truth = truth(static_cast<Eigen::Index>(j));
      ps.stats = trimmed_summary(std::move(columns[j]), ps.truth, options.trim);
      ms.parameters.push_back(std::move(ps));
    }
    report.methods.push_back(std::move(ms));
  }
  return report;
}

std::string report_csv(const SimulationReport& report) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "scenario,method,parameter,truth,bias,variance,mse,used,reps,nonconverged,latency_nonconverged,"
         "failures,seed\n";
  for (const auto& ms : report.methods)
    for (const auto& ps : ms.parameters)
      out << report.scenario_key << ',' << method_name(ms.method) << ',' << ps.name << ',' << ps.truth << ','
          << ps.stats.bias << ',' << ps.stats.variance << ',' << ps.stats.mse << ',' << ps.stats.used << ','
          << report.reps << ',' << ms.nonconverged << ',' << ms.latency_nonconverged << ',' << ms.failures
          << ',' << report.seed << '\n';
  return out.str();
}

}  // namespace curemix
