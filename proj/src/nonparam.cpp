#include "curemix/nonparam.hpp"

#include "curemix/error.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace curemix {

StepFunction kaplan_meier(const Eigen::Ref<const Eigen::VectorXd>& times,
                          const Eigen::Ref<const Eigen::VectorXi>& deltas) {
  if (times.size() == 0) throw DataError("Kaplan-Meier needs at least one observation");
  if (times.size() != deltas.size()) throw DataError("times and status lengths differ");
  for (Eigen::Index i = 0; i < deltas.size(); ++i)
    if (deltas(i) != 0 && deltas(i) != 1) throw DataError("status must be 0 or 1");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(times.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return times(a) < times(b); });

  std::vector<double> t_out;
  std::vector<double> s_out;
  double surv = 1.0;
  double at_risk = static_cast<double>(times.size());
  std::size_t pos = 0;
  while (pos < order.size()) {
    const double t = times(order[pos]);
    double events = 0.0;
    double leaving = 0.0;
    while (pos < order.size() && times(order[pos]) == t) {
      events += deltas(order[pos]);
      leaving += 1.0;
      ++pos;
    }
    if (events > 0.0) {
      surv *= 1.0 - events / at_risk;
      t_out.push_back(t);
      s_out.push_back(surv);
    }
    at_risk -= leaving;
  }
  return StepFunction(std::move(t_out), std::move(s_out), Monotone::nonincreasing, 1.0);
}

std::map<double, StepFunction> kaplan_meier_by_group(const Eigen::Ref<const Eigen::VectorXd>& times,
                                                     const Eigen::Ref<const Eigen::VectorXi>& deltas,
                                                     const Eigen::Ref<const Eigen::VectorXd>& groups) {
  if (groups.size() != times.size()) throw DataError("group column length differs from times");
  std::map<double, std::vector<Eigen::Index>> members;
  for (Eigen::Index i = 0; i < groups.size(); ++i) members[groups(i)].push_back(i);
  std::map<double, StepFunction> out;
  for (const auto& [g, rows] : members) {
    Eigen::VectorXd t(static_cast<Eigen::Index>(rows.size()));
    Eigen::VectorXi d(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      t(static_cast<Eigen::Index>(k)) = times(rows[k]);
      d(static_cast<Eigen::Index>(k)) = deltas(rows[k]);
    }
    out.emplace(g, kaplan_meier(t, d));
  }
  return out;
}

double plateau_fraction(const SurvivalDataset& ds) {
  const double last = ds.last_event_time();
  const auto beyond = (ds.y().array() > last).count();
  return static_cast<double>(beyond) / static_cast<double>(ds.n());
}

}  // namespace curemix
