#pragma once

#include "curemix/data.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace curemix::testing {

// Dataset with an intercept, the given continuous X columns and Z columns.
inline SurvivalDataset make_dataset(const std::vector<double>& y, const std::vector<int>& delta,
                                    const std::vector<std::vector<double>>& xcols,
                                    const std::vector<std::vector<double>>& zcols,
                                    EventPolicy policy = EventPolicy::require) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::VectorXd yv(n);
  Eigen::VectorXi dv(n);
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(xcols.size() + 1));
  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(zcols.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    yv(i) = y[static_cast<std::size_t>(i)];
    dv(i) = delta[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    for (std::size_t j = 0; j < xcols.size(); ++j) x(i, static_cast<Eigen::Index>(j + 1)) = xcols[j][static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < zcols.size(); ++j) z(i, static_cast<Eigen::Index>(j)) = zcols[j][static_cast<std::size_t>(i)];
  }
  return SurvivalDataset(yv, dv, x, z, CovariateMeta::unnamed(xcols.size(), zcols.size()), policy);
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double e : v) out(i++) = e;
  return out;
}

// Same dataset with rows in the order given by `perm`.
inline SurvivalDataset permuted(const SurvivalDataset& ds, const std::vector<std::size_t>& perm) {
  return ds.subset(perm);
}

}  // namespace curemix::testing
