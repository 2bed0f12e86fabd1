#include "curemix/kernels.hpp"

#include "curemix/error.hpp"
#include "curemix/parallel.hpp"
#include "curemix/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace curemix {

double epanechnikov(double u) noexcept {
  return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

Bandwidth::Bandwidth(std::vector<double> h) : h_(std::move(h)) {
  for (double v : h_)
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("bandwidth entries must be positive");
}

Bandwidth Bandwidth::capped(double cap) const {
  if (!(cap > 0.0)) throw ConfigError("bandwidth cap must be positive");
  std::vector<double> h = h_;
  for (double& v : h) v = std::min(v, cap);
  return Bandwidth(std::move(h));
}

Bandwidth Bandwidth::uniform(std::size_t dims, double h) {
  return Bandwidth(std::vector<double>(dims, h));
}

double kernel_weight(const Eigen::Ref<const Eigen::VectorXd>& xi,
                     const Eigen::Ref<const Eigen::VectorXd>& x, const Bandwidth& b,
                     const CovariateMeta& meta) {
  double w = 1.0;
  std::size_t c = 0;
  for (std::size_t j = 0; j < meta.x_columns(); ++j) {
    const auto col = static_cast<Eigen::Index>(j + 1);
    if (meta.x_kinds[j] == CovariateKind::discrete) {
      if (xi(col) != x(col)) return 0.0;
    } else {
      if (c >= b.size()) throw ConfigError("bandwidth has fewer entries than continuous covariates");
      const double h = b[c++];
      w *= epanechnikov((xi(col) - x(col)) / h) / h;
    }
  }
  if (c != b.size()) throw ConfigError("bandwidth has more entries than continuous covariates");
  return w;
}

Eigen::VectorXd kernel_weights(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Bandwidth& b) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(ds.n()));
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = kernel_weight(ds.x().row(i).transpose(), x, b, ds.meta());
  return w;
}

BandwidthGrid BandwidthGrid::log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0)
    throw ConfigError("bandwidth grid needs 0 < lo <= hi and at least one point");
  BandwidthGrid grid;
  if (count == 1) {
    grid.values.push_back(lo);
    return grid;
  }
  const double step = std::log(hi / lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k)
    grid.values.push_back(k + 1 == count ? hi : lo * std::exp(step * static_cast<double>(k)));
  return grid;
}

BandwidthGrid BandwidthGrid::standard() { return log_spaced(0.05, 2.0, 30); }

BandwidthGrid BandwidthGrid::parse(const std::string& spec) {
  std::istringstream in(spec);
  double lo = 0.0, hi = 0.0;
  long count = 0;
  char c1 = 0, c2 = 0;
  if (!(in >> lo >> c1 >> hi >> c2 >> count) || c1 != ':' || c2 != ':' || count <= 0)
    throw ConfigError("bandwidth grid must look like lo:hi:n, got '" + spec + "'");
  return log_spaced(lo, hi, static_cast<std::size_t>(count));
}

namespace {

// Pairwise quantities that do not depend on the bandwidth.
class CvWorkspace {
 public:
  explicit CvWorkspace(const SurvivalDataset& ds) : n_(ds.n()) {
    const auto& meta = ds.meta();
    const auto cont = meta.continuous_columns();
    const auto disc = meta.discrete_columns();
    dims_ = cont.size();
    match_.assign(n_ * n_, 1);
    diffs_.assign(dims_, std::vector<double>(n_ * n_));
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        const auto ri = static_cast<Eigen::Index>(i);
        const auto rj = static_cast<Eigen::Index>(j);
        for (std::size_t col : disc)
          if (ds.x()(ri, static_cast<Eigen::Index>(col)) != ds.x()(rj, static_cast<Eigen::Index>(col)))
            match_[i * n_ + j] = 0;
        for (std::size_t d = 0; d < dims_; ++d) {
          const auto col = static_cast<Eigen::Index>(cont[d]);
          diffs_[d][i * n_ + j] = ds.x()(ri, col) - ds.x()(rj, col);
        }
      }
    }
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(),
                     [&](std::size_t a, std::size_t b) { return ds.y()(static_cast<Eigen::Index>(a)) < ds.y()(static_cast<Eigen::Index>(b)); });
    y_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) y_[i] = ds.y()(static_cast<Eigen::Index>(i));
    for (std::size_t k : order_)
      if (ds.is_event(k) && (times_.empty() || times_.back() < y_[k])) times_.push_back(y_[k]);
  }

  std::size_t dims() const noexcept { return dims_; }

  double criterion(const std::vector<double>& h) const {
    std::vector<double> weight(n_ * n_, 0.0);
    for (std::size_t idx = 0; idx < n_ * n_; ++idx) {
      if (!match_[idx]) continue;
      double w = 1.0;
      for (std::size_t d = 0; d < dims_ && w > 0.0; ++d)
        w *= epanechnikov(diffs_[d][idx] / h[d]) / h[d];
      weight[idx] = w;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double* row = weight.data() + i * n_;
      double denom = 0.0;
      for (std::size_t j = 0; j < n_; ++j)
        if (j != i) denom += row[j];
      if (!(denom > 0.0)) continue;
      double acc = 0.0;
      std::size_t pos = 0;
      for (double t : times_) {
        while (pos < n_ && y_[order_[pos]] <= t) {
          const std::size_t j = order_[pos++];
          if (j != i) acc += row[j];
        }
        const double indicator = y_[i] <= t ? 1.0 : 0.0;
        const double r = indicator - acc / denom;
        total += r * r;
      }
    }
    return total;
  }

 private:
  std::size_t n_;
  std::size_t dims_ = 0;
  std::vector<unsigned char> match_;
  std::vector<std::vector<double>> diffs_;
  std::vector<std::size_t> order_;
  std::vector<double> y_;
  std::vector<double> times_;
};

void check_cv_input(const SurvivalDataset& ds) {
  if (ds.event_count() == 0)
    throw DataError("cross-validation is restricted to [0, last event time]; no events");
  if (ds.meta().continuous_columns().empty())
    throw ConfigError("cross-validation needs at least one continuous incidence covariate");
}

}  // namespace

double kernel_scale_factor(CvKernelScale scale) noexcept {
  return scale == CvKernelScale::unit_variance ? std::sqrt(5.0) : 1.0;
}

double cv_criterion(const SurvivalDataset& ds, const Bandwidth& b, CvKernelScale scale) {
  check_cv_input(ds);
  CvWorkspace ws(ds);
  if (b.size() != ws.dims()) throw ConfigError("bandwidth dimension mismatch");
  std::vector<double> h = b.values();
  for (double& v : h) v *= kernel_scale_factor(scale);
  return ws.criterion(h);
}

CvResult cv_bandwidth_detail(const SurvivalDataset& ds, const std::optional<BandwidthGrid>& grid,
                             std::uint64_t seed, const CvOptions& options) {
  check_cv_input(ds);
  const BandwidthGrid g = grid.value_or(BandwidthGrid::standard());
  std::vector<double> values;
  for (double v : g.values)
    if (v > 0.0 && std::isfinite(v)) values.push_back(v);
  if (values.empty()) throw ConfigError("bandwidth grid has no positive values");

  const CvWorkspace ws(ds);
  const std::size_t dims = ws.dims();
  const std::size_t m = values.size();
  const double factor = kernel_scale_factor(options.kernel_scale);
  CvResult result;

  auto pick = [&](const std::vector<std::vector<std::size_t>>& candidates) {
    std::vector<double> crit(candidates.size());
    parallel_for(candidates.size(), options.workers, [&](std::size_t c) {
      std::vector<double> h(dims);
      for (std::size_t d = 0; d < dims; ++d) h[d] = values[candidates[c][d]] * factor;
      crit[c] = ws.criterion(h);
    });
    result.evaluations += candidates.size();
    std::size_t best = 0;
    for (std::size_t c = 1; c < crit.size(); ++c)
      if (crit[c] < crit[best]) best = c;
    return std::pair{best, crit[best]};
  };

  std::vector<std::size_t> chosen(dims, 0);
  double best_crit = std::numeric_limits<double>::infinity();
  if (dims <= options.exhaustive_max_dims) {
    std::size_t total = 1;
    for (std::size_t d = 0; d < dims; ++d) total *= m;
    std::vector<std::vector<std::size_t>> candidates(total, std::vector<std::size_t>(dims));
    for (std::size_t c = 0; c < total; ++c) {
      std::size_t rest = c;
      for (std::size_t d = dims; d-- > 0;) {
        candidates[c][d] = rest % m;
        rest /= m;
      }
    }
    const auto [best, crit] = pick(candidates);
    chosen = candidates[best];
    best_crit = crit;
  } else {
    RandomStream rng(seed, Purpose::bandwidth_search, 0);
    for (auto& idx : chosen) idx = static_cast<std::size_t>(rng.below(m));
    for (std::size_t sweep = 0; sweep < options.coordinate_sweeps; ++sweep) {
      bool changed = false;
      for (std::size_t d = 0; d < dims; ++d) {
        std::vector<std::vector<std::size_t>> candidates(m, chosen);
        for (std::size_t k = 0; k < m; ++k) candidates[k][d] = k;
        const auto [best, crit] = pick(candidates);
        if (best != chosen[d]) changed = true;
        chosen[d] = best;
        best_crit = crit;
      }
      if (!changed) break;
    }
  }

  std::vector<double> raw(dims);
  for (std::size_t d = 0; d < dims; ++d) raw[d] = values[chosen[d]];
  result.raw_minimizer = Bandwidth(raw);
  result.bandwidth = result.raw_minimizer.capped(options.cap);
  result.criterion = best_crit;
  return result;
}

Bandwidth cv_bandwidth(const SurvivalDataset& ds, const std::optional<BandwidthGrid>& grid,
                       std::uint64_t seed, const CvOptions& options) {
  return cv_bandwidth_detail(ds, grid, seed, options).bandwidth;
}

}  // namespace curemix
