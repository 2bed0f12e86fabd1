#include "curemix/error.hpp"
#include "curemix/step_function.hpp"

#include <doctest.h>

using namespace curemix;

TEST_CASE("right-continuous evaluation") {
  const auto f = StepFunction::from_jumps({1.0, 2.5, 4.0}, {0.5, 0.25, 1.0});
  CHECK(f(0.99) == 0.0);
  CHECK(f(1.0) == 0.5);
  CHECK(f(2.0) == 0.5);
  CHECK(f(2.5) == 0.75);
  CHECK(f(100.0) == 1.75);
  CHECK(f.jump_at(2.5) == 0.25);
  CHECK(f.jump_at(3.0) == 0.0);
  CHECK(f.jumps() == std::vector<double>{0.5, 0.25, 1.0});
  CHECK(f.last_time() == 4.0);
}

TEST_CASE("nonincreasing variant with an initial value") {
  const StepFunction s({1.0, 2.0}, {0.75, 0.375}, Monotone::nonincreasing, 1.0);
  CHECK(s(0.5) == 1.0);
  CHECK(s(1.5) == 0.75);
  CHECK(s(9.0) == 0.375);
  CHECK_THROWS_AS(StepFunction({1.0, 2.0}, {0.5, 0.75}, Monotone::nonincreasing, 1.0), NumericalError);
}

TEST_CASE("structural invariants are enforced") {
  CHECK_THROWS_AS(StepFunction({1.0, 1.0}, {0.1, 0.2}), NumericalError);
  CHECK_THROWS_AS(StepFunction({2.0, 1.0}, {0.1, 0.2}), NumericalError);
  CHECK_THROWS_AS(StepFunction({1.0, 2.0}, {0.2, 0.1}), NumericalError);
  CHECK_THROWS_AS(StepFunction({1.0}, {0.1, 0.2}), NumericalError);
  CHECK_THROWS_AS(StepFunction::from_jumps({1.0}, {-0.1}), NumericalError);
  CHECK_THROWS_AS(StepFunction().last_time(), NumericalError);
}

TEST_CASE("sup distance") {
  const auto a = StepFunction::from_jumps({1, 2, 3}, {0.1, 0.2, 0.3});
  const auto b = StepFunction::from_jumps({1, 2, 3}, {0.1, 0.5, 0.3});
  CHECK(StepFunction::sup_distance(a, b) == doctest::Approx(0.3));
  CHECK(StepFunction::sup_distance(a, a) == 0.0);
  CHECK_THROWS_AS(StepFunction::sup_distance(a, StepFunction::from_jumps({1, 2}, {0.1, 0.2})), NumericalError);
}
