#include "curemix/presmoother.hpp"

#include "curemix/error.hpp"
#include "curemix/parallel.hpp"

#include <algorithm>
#include <numeric>

namespace curemix {

namespace {

// Subjects sorted by follow-up time plus the distinct uncensored times.
struct TimeIndex {
  std::vector<std::size_t> order;
  std::vector<double> times;

  explicit TimeIndex(const SurvivalDataset& ds) : order(ds.n()) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto& y = ds.y();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return y(static_cast<Eigen::Index>(a)) < y(static_cast<Eigen::Index>(b));
    });
    for (std::size_t k : order) {
      const double t = y(static_cast<Eigen::Index>(k));
      if (ds.is_event(k) && (times.empty() || times.back() < t)) times.push_back(t);
    }
  }
};

ConditionalSubdist subdist_from_weights(const SurvivalDataset& ds, const TimeIndex& index,
                                        const Eigen::VectorXd& raw) {
  const double total = raw.sum();
  if (!(total > 0.0))
    throw EmptyNeighborhoodError("no subject has positive kernel weight at the query point");
  ConditionalSubdist out;
  out.event_times = index.times;
  out.h1_mass.assign(index.times.size(), 0.0);
  out.at_risk.assign(index.times.size(), 0.0);

  // Walk the subjects from the largest time down, accumulating the mass at risk.
  const auto& y = ds.y();
  double tail = 0.0;
  std::size_t pos = ds.n();
  for (std::size_t k = index.times.size(); k-- > 0;) {
    const double t = index.times[k];
    double tied_events = 0.0;
    while (pos > 0 && y(static_cast<Eigen::Index>(index.order[pos - 1])) >= t) {
      const std::size_t i = index.order[--pos];
      const double w = raw(static_cast<Eigen::Index>(i)) / total;
      tail += w;
      if (ds.is_event(i) && y(static_cast<Eigen::Index>(i)) == t) tied_events += w;
    }
    out.h1_mass[k] = tied_events;
    out.at_risk[k] = tail;
  }
  return out;
}

double product_limit(const ConditionalSubdist& s) {
  double value = 1.0;
  for (std::size_t k = 0; k < s.event_times.size(); ++k) {
    // 0/0 factors (no mass left) are skipped.
    if (!(s.at_risk[k] > 0.0)) continue;
    const double factor = std::clamp(1.0 - s.h1_mass[k] / s.at_risk[k], 0.0, 1.0);
    value *= factor;
  }
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace

ConditionalSubdist conditional_subdist(const SurvivalDataset& ds,
                                       const Eigen::Ref<const Eigen::VectorXd>& x,
                                       const Bandwidth& b) {
  const TimeIndex index(ds);
  return subdist_from_weights(ds, index, kernel_weights(ds, x, b));
}

CureProbEstimate estimate_cure_prob(const SurvivalDataset& ds,
                                    const Eigen::Ref<const Eigen::VectorXd>& x,
                                    const Bandwidth& b) {
  return CureProbEstimate{product_limit(conditional_subdist(ds, x, b)), x, b};
}

Eigen::VectorXd presmooth_all(const SurvivalDataset& ds, const Bandwidth& b, std::size_t workers) {
  const TimeIndex index(ds);
  Eigen::VectorXd out(static_cast<Eigen::Index>(ds.n()));
  parallel_for(ds.n(), workers, [&](std::size_t i) {
    const auto r = static_cast<Eigen::Index>(i);
    const Eigen::VectorXd raw = kernel_weights(ds, ds.x().row(r).transpose(), b);
    out(r) = product_limit(subdist_from_weights(ds, index, raw));
  });
  return out;
}

}  // namespace curemix
