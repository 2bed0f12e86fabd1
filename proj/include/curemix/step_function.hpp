#pragma once

#include <cstddef>
#include <vector>

namespace curemix {

enum class Monotone { nondecreasing, nonincreasing };

// Right-continuous piecewise-constant function: equal to `initial` before the first
// time and to values[k] on [times[k], times[k+1]).
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> times, std::vector<double> values,
               Monotone direction = Monotone::nondecreasing, double initial = 0.0);

  // Builds a cumulative function from jump sizes.
  static StepFunction from_jumps(std::vector<double> times, const std::vector<double>& jumps);

  double operator()(double t) const;
  // Size of the jump at exactly t (0 if t is not a jump time).
  double jump_at(double t) const;
  std::vector<double> jumps() const;

  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  double initial() const noexcept { return initial_; }
  Monotone direction() const noexcept { return direction_; }
  double last_time() const;

  // sup_t |f(t) - g(t)| for two functions on the same time grid.
  static double sup_distance(const StepFunction& a, const StepFunction& b);

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  Monotone direction_ = Monotone::nondecreasing;
  double initial_ = 0.0;
};

}  // namespace curemix
