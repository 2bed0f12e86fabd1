#include "curemix/latency_cox.hpp"
#include "curemix/likelihood.hpp"
#include "curemix/mle_baseline.hpp"
#include "curemix/simulate.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace curemix;
using curemix::testing::make_dataset;
using curemix::testing::vec;

TEST_CASE("observed log-likelihood hand values") {
  // Event at 1 with a unit jump, plus a subject censored after the last event.
  const auto ds = make_dataset({1.0, 2.0}, {1, 0}, {}, {{0.0, 0.0}});
  const auto lambda = StepFunction::from_jumps({1.0}, {1.0});
  const double g = std::log(0.3 / 0.7);
  CHECK(observed_loglik(ds, vec({g}), vec({0.0}), lambda) == doctest::Approx((-1.0 + std::log(0.7)) / 2).epsilon(1e-14));
  CHECK(observed_loglik(ds, vec({g}), vec({0.0}), lambda, LoglikTerms::full) ==
        doctest::Approx((-1.0 + std::log(0.3) + std::log(0.7)) / 2).epsilon(1e-14));

  const auto zero = StepFunction::from_jumps({1.0}, {0.0});
  CHECK(observed_loglik(ds, vec({g}), vec({0.0}), zero) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("censored-before-last-event contribution") {
  const auto ds = make_dataset({1.0, 0.5, 2.0}, {1, 0, 1}, {}, {{0.0, 0.0, 0.0}});
  const auto lambda = StepFunction::from_jumps({1.0, 2.0}, {0.4, 0.6});
  const double phi = 0.6;
  const double g = std::log(phi / (1 - phi));
  // Subject 2 sits before any jump: S_u = 1, contribution log(1 - phi + phi) = 0.
  const double expected = ((std::log(0.4) - 0.4) + 0.0 + (std::log(0.6) - 1.0)) / 3;
  CHECK(observed_loglik(ds, vec({g}), vec({0.0}), lambda) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("no censoring leaves the cure fraction unidentified") {
  const auto sc = find_scenario("m1/s1/c1");
  const auto full = generate(sc, 3, 0);
  std::vector<std::size_t> events;
  for (std::size_t i = 0; i < full.n(); ++i)
    if (full.is_event(i)) events.push_back(i);
  MleOptions opts;
  opts.max_iter = 100;
  const auto fit = fit_mle_em(full.subset(events), opts);
  CHECK_FALSE(fit.converged);
  CHECK(fit.iterations == 100);
}

TEST_CASE("EM log-likelihood is monotone on a Model 1 draw") {
  const auto sc = find_scenario("m1/s1/c1");
  auto big = sc;
  big.n = 400;
  for (const auto& data : {generate(big, 2024, 0), generate(sc, 12, 0)}) {
    const auto fit = fit_mle_em(data);
    CHECK(fit.converged);
    REQUIRE(fit.loglik_trace.size() == fit.iterations + 1);
    for (std::size_t k = 1; k < fit.loglik_trace.size(); ++k)
      CHECK(fit.loglik_trace[k] >= fit.loglik_trace[k - 1] - 1e-10);
    CHECK(fit.loglik == doctest::Approx(observed_loglik(data, fit.gamma, fit.beta, fit.lambda, LoglikTerms::full)).epsilon(1e-12));
  }
}

TEST_CASE("demo batch surfaces non-convergence") {
  const auto sc = find_scenario("demo/s1/c1");
  std::size_t failed = 0;
  for (std::uint64_t rep = 0; rep < 30; ++rep)
    if (!fit_mle_em(generate(sc, 77, rep)).converged) ++failed;
  CHECK(failed > 0);
}

TEST_CASE("frozen-weight M-step equals one latency iteration") {
  const auto sc = find_scenario("m1/s1/c1");
  const auto ds = generate(sc, 8, 0);
  PartialFitOptions inner;
  inner.check_rank = false;
  const auto start = no_cure_cox(ds, inner);
  const Eigen::VectorXd w = compute_weights(ds, sc.gamma, start.partial.beta, start.lambda);
  const auto step = latency_m_step(ds, w, start.partial.beta, inner);

  LatencyOptions one;
  one.max_iter = 1;
  const auto fit = fit_latency(ds, sc.gamma, one);
  CHECK(fit.beta == step.partial.beta);
  CHECK(fit.lambda.values() == step.lambda.values());
}

TEST_CASE("plateau-label initialization") {
  const auto ds = make_dataset({1, 2, 3, 4, 5, 6}, {1, 0, 1, 0, 0, 0}, {{0.1, 0.4, -0.3, 0.9, -0.8, 0.2}}, {});
  const auto init = plateau_label_incidence(ds);
  CHECK(init.converged);
  // Labels: cured only for the three subjects past the last event (time 3).
  const Eigen::VectorXd cured = vec({0, 0, 0, 1, 1, 1});
  CHECK((init.gamma - fit_incidence(cured, ds.x()).gamma).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("EM is permutation invariant") {
  const auto sc = find_scenario("m1/s1/c1");
  const auto ds = generate(sc, 10, 0);
  std::vector<std::size_t> perm(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) perm[i] = (i * 29 + 4) % ds.n();
  const auto a = fit_mle_em(ds);
  const auto b = fit_mle_em(ds.subset(perm));
  CHECK((a.gamma - b.gamma).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((a.beta - b.beta).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(StepFunction::sup_distance(a.lambda, b.lambda) < 1e-8);
  CHECK(a.method == Method::mle);
}
