#include "curemix/step_function.hpp"

#include "curemix/error.hpp"

#include <algorithm>
#include <cmath>

namespace curemix {

StepFunction::StepFunction(std::vector<double> times, std::vector<double> values,
                           Monotone direction, double initial)
    : times_(std::move(times)), values_(std::move(values)), direction_(direction), initial_(initial) {
  if (times_.size() != values_.size())
    throw NumericalError("step function needs one value per time");
  double prev = initial_;
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (!std::isfinite(times_[k]) || !std::isfinite(values_[k]))
      throw NumericalError("step function entries must be finite");
    if (k > 0 && !(times_[k] > times_[k - 1]))
      throw NumericalError("step function times must be strictly increasing");
    const bool ok = direction_ == Monotone::nondecreasing ? values_[k] >= prev : values_[k] <= prev;
    if (!ok) throw NumericalError("step function values violate monotonicity");
    prev = values_[k];
  }
}

StepFunction StepFunction::from_jumps(std::vector<double> times, const std::vector<double>& jumps) {
  if (times.size() != jumps.size()) throw NumericalError("one jump per time required");
  std::vector<double> values(jumps.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    if (jumps[k] < 0.0) throw NumericalError("negative jump in cumulative function");
    acc += jumps[k];
    values[k] = acc;
  }
  return StepFunction(std::move(times), std::move(values));
}

double StepFunction::operator()(double t) const {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double StepFunction::jump_at(double t) const {
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.end() || *it != t) return 0.0;
  const auto k = static_cast<std::size_t>(it - times_.begin());
  return values_[k] - (k == 0 ? initial_ : values_[k - 1]);
}

std::vector<double> StepFunction::jumps() const {
  std::vector<double> out(values_.size());
  for (std::size_t k = 0; k < values_.size(); ++k)
    out[k] = values_[k] - (k == 0 ? initial_ : values_[k - 1]);
  return out;
}

double StepFunction::last_time() const {
  if (times_.empty()) throw NumericalError("empty step function has no last time");
  return times_.back();
}

double StepFunction::sup_distance(const StepFunction& a, const StepFunction& b) {
  if (a.times_ != b.times_) throw NumericalError("step functions live on different time grids");
  double d = std::abs(a.initial_ - b.initial_);
  for (std::size_t k = 0; k < a.values_.size(); ++k)
    d = std::max(d, std::abs(a.values_[k] - b.values_[k]));
  return d;
}

}  // namespace curemix
