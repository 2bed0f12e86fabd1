#include "curemix/error.hpp"
#include "curemix/inference.hpp"
#include "curemix/pipeline.hpp"
#include "curemix/simulate.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace curemix;
using curemix::testing::make_dataset;
using curemix::testing::vec;

namespace {

CureModelFit manual_fit(Eigen::VectorXd gamma, Eigen::VectorXd beta, StepFunction lambda) {
  CureModelFit fit;
  fit.gamma = std::move(gamma);
  fit.beta = std::move(beta);
  fit.lambda = std::move(lambda);
  fit.converged = true;
  return fit;
}

Subject subject(double y, int delta, Eigen::VectorXd x, Eigen::VectorXd z) { return {y, delta, std::move(x), std::move(z)}; }

Refit presmooth_refit(const SurvivalDataset& ds, std::uint64_t seed) {
  PresmoothOptions o;
  o.seed = seed;
  const auto r = fit_presmoothing(ds, o);
  return {stacked_parameters(r.fit), r.fit.converged, r.latency.converged};
}

}  // namespace

TEST_CASE("Wald test values") {
  CHECK(wald_test(0.0, 1.0) == 1.0);
  CHECK(std::abs(wald_test(1.959964, 1.0) - 0.05) < 1e-6);
  const double p = wald_test(1.6697, 0.3415);
  CHECK(p > 5e-7);
  CHECK(p < 5e-6);
  CHECK_THROWS_AS(wald_test(1.0, 0.0), InferenceError);
  CHECK_THROWS_AS(wald_test(1.0, -1.0), InferenceError);
  for (double e : {0.1, 0.7, 2.5, 6.0}) CHECK(wald_test(e, 0.8) == wald_test(-e, 0.8));
}

TEST_CASE("predicted weights") {
  const auto lambda = StepFunction::from_jumps({1.0, 2.0}, {0.4, 0.6});
  const auto fit = manual_fit(vec({0.0}), vec({0.0}), lambda);
  CHECK(predicted_weight(fit, subject(1.5, 1, vec({1}), vec({0}))) == 1.0);
  CHECK(predicted_weight(fit, subject(2.5, 0, vec({1}), vec({0}))) == 0.0);
  const double e = std::exp(-1.0);
  CHECK(predicted_weight(fit, subject(2.0, 0, vec({1}), vec({0}))) == doctest::Approx(e / (1 + e)).epsilon(1e-14));

  auto bad = fit;
  bad.converged = false;
  CHECK_THROWS_AS(predicted_weight(bad, subject(1.5, 1, vec({1}), vec({0}))), InferenceError);
}

TEST_CASE("prediction error values") {
  const auto lambda = StepFunction::from_jumps({1.0, 2.0}, {0.4, 0.6});
  const auto half = manual_fit(vec({0.0}), vec({0.0}), lambda);
  const auto one_event = make_dataset({1.5, 1.0}, {1, 1}, {}, {{0, 0}});
  CHECK(std::abs(prediction_error(half, one_event) / 2 - std::log(2.0)) < 1e-10);

  // W = 0 (censored past the training plateau) with phi = 1.
  const auto sure = manual_fit(vec({800.0}), vec({0.0}), lambda);
  const auto tail = make_dataset({3.0, 4.0}, {0, 0}, {}, {{0, 0}}, EventPolicy::allow_none);
  CHECK(prediction_error(sure, tail) == 0.0);
  CHECK(prediction_error(sure, tail, PePairing::flipped) == doctest::Approx(1600.0));

  // phi exactly 1 paired with a nonzero weight.
  const auto certain = manual_fit(vec({std::numeric_limits<double>::infinity()}), vec({0.0}), lambda);
  const auto event_tail = make_dataset({1.0, 4.0}, {1, 0}, {}, {{0, 0}});
  CHECK(prediction_error(certain, event_tail) == std::numeric_limits<double>::infinity());
}

TEST_CASE("two-subject prediction error against a direct sum") {
  const auto lambda = StepFunction::from_jumps({1.0, 2.0}, {0.4, 0.6});
  const auto fit = manual_fit(vec({0.3, -0.8}), vec({0.5}), lambda);
  const auto test = make_dataset({1.5, 0.7}, {0, 1}, {{0.4, -1.1}}, {{0.2, -0.3}});
  long double direct = 0.0L;
  for (int j = 0; j < 2; ++j) {
    const long double eta = 0.3L - 0.8L * (j == 0 ? 0.4L : -1.1L);
    const long double phi = 1.0L / (1.0L + std::exp(-eta));
    long double w = 1.0L;
    if (j == 0) {
      const long double su = std::exp(-0.4L * std::exp(0.5L * 0.2L));
      w = phi * su / (1.0L - phi + phi * su);
    }
    direct -= w * std::log(1.0L - phi) + (1.0L - w) * std::log(phi);
  }
  CHECK(std::abs(prediction_error(fit, test) - static_cast<double>(direct)) < 1e-12);
}

TEST_CASE("prediction error is nonnegative") {
  const auto sc = find_scenario("m1/s1/c1");
  const auto fit = fit_mle(generate(sc, 1, 0));
  REQUIRE(fit.converged);
  for (std::uint64_t r = 1; r < 4; ++r) {
    const auto test = generate(sc, 1, r);
    CHECK(prediction_error(fit, test) >= 0.0);
    CHECK(prediction_error(fit, test, PePairing::flipped) >= 0.0);
  }
}

TEST_CASE("bootstrap indices are reproducible and in range") {
  const auto a = bootstrap_indices(50, 9, 3);
  CHECK(a == bootstrap_indices(50, 9, 3));
  CHECK(a != bootstrap_indices(50, 9, 4));
  CHECK(a.size() == 50);
  for (std::size_t i : a) CHECK(i < 50);
}

TEST_CASE("constant estimator has zero standard error") {
  const auto ds = make_dataset({1, 2, 3, 4}, {1, 1, 1, 1}, {}, {});
  const Estimator constant = [](const SurvivalDataset&) { return Refit{vec({1.5, 0.0})}; };
  const auto res = bootstrap_se(ds, constant, 20, 1);
  CHECK(res.se.isZero());
  CHECK(res.pvalues(0) == 0.0);
  CHECK(res.pvalues(1) == 1.0);
  CHECK(res.estimates.rows() == 20);
  CHECK(res.failures == 0);
}

TEST_CASE("bootstrap failures are dropped and counted") {
  const auto ds = make_dataset({1, 2, 3, 4, 5}, {1, 0, 1, 1, 0}, {}, {});
  const Estimator sometimes = [](const SurvivalDataset& d) {
    const double m = d.y().mean();
    if (m > 3.0) throw NumericalError("synthetic failure");
    return Refit{vec({m}), m < 2.5};
  };
  const auto res = bootstrap_se(ds, sometimes, 200, 5);
  CHECK(res.failures > 0);
  CHECK(static_cast<std::size_t>(res.estimates.rows()) == res.B - res.failures);
  CHECK(res.replicates.size() == static_cast<std::size_t>(res.estimates.rows()));
  for (Eigen::Index k = 0; k < res.estimates.rows(); ++k) CHECK(res.estimates(k, 0) < 2.5);

  const Estimator never = [&](const SurvivalDataset& d) -> Refit {
    if (d.y() == ds.y()) return Refit{vec({0.0})};
    throw NumericalError("every resample");
  };
  CHECK_THROWS_AS(bootstrap_se(ds, never, 10, 5), InferenceError);
  CHECK_THROWS_AS(bootstrap_se(ds, sometimes, 1, 5), ConfigError);
}

TEST_CASE("bootstrap rows replay from their index streams") {
  const auto ds = make_dataset({0.5, 1, 2, 3, 4, 5.5}, {1, 0, 1, 1, 0, 1}, {{0.1, 0.3, -0.2, 0.9, 0.4, -0.6}}, {});
  const Estimator mean_x = [](const SurvivalDataset& d) { return Refit{vec({d.x().col(1).mean(), d.y().sum()})}; };
  const auto res = bootstrap_se(ds, mean_x, 30, 11);
  for (Eigen::Index k = 0; k < res.estimates.rows(); ++k) {
    const auto idx = bootstrap_indices(ds.n(), 11, res.replicates[static_cast<std::size_t>(k)]);
    const auto again = mean_x(ds.subset(idx)).estimate;
    CHECK(res.estimates(k, 0) == again(0));
    CHECK(res.estimates(k, 1) == again(1));
  }
  CHECK((res.se.array() >= 0.0).all());
  CHECK((res.pvalues.array() >= 0.0).all());
  CHECK((res.pvalues.array() <= 1.0).all());
}

TEST_CASE("presmoothing bootstrap is deterministic and worker independent") {
  const auto sc = find_scenario("m1/s1/c1");
  const auto ds = generate(sc, 31, 0);
  const Estimator est = [](const SurvivalDataset& d) { return presmooth_refit(d, 3); };
  const auto a = bootstrap_se(ds, est, 12, 4, 1);
  const auto b = bootstrap_se(ds, est, 12, 4, 1);
  const auto c = bootstrap_se(ds, est, 12, 4, 3);
  CHECK(a.estimates == b.estimates);
  CHECK(a.estimates == c.estimates);
  CHECK(a.se == c.se);
}

TEST_CASE("bootstrap standard error of gamma_2 brackets the Monte Carlo spread") {
  const auto sc = find_scenario("m1/s1/c1");
  const auto ds = generate(sc, 20240601, 0);
  const Estimator est = [](const SurvivalDataset& d) { return presmooth_refit(d, 20240601); };
  const auto res = bootstrap_se(ds, est, 200, 20240601, 2);
  const double se = res.se(1);
  MESSAGE("bootstrap se(gamma_2) = " << se << ", failures " << res.failures);
  CHECK(se >= 0.6 * std::sqrt(0.164));
  CHECK(se <= 1.5 * std::sqrt(0.164));
}
