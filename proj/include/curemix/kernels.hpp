#pragma once

#include "curemix/data.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace curemix {

double epanechnikov(double u) noexcept;

// One strictly positive smoothing parameter per continuous incidence covariate.
class Bandwidth {
 public:
  Bandwidth() = default;
  explicit Bandwidth(std::vector<double> h);

  std::size_t size() const noexcept { return h_.size(); }
  double operator[](std::size_t j) const { return h_[j]; }
  const std::vector<double>& values() const noexcept { return h_; }

  Bandwidth capped(double cap) const;

  // Same value for every continuous covariate.
  static Bandwidth uniform(std::size_t dims, double h);

  friend bool operator==(const Bandwidth&, const Bandwidth&) = default;

 private:
  std::vector<double> h_;
};

// Product kernel: Epanechnikov over continuous columns (scaled by 1/h), exact
// matching over discrete columns. The intercept column never contributes.
double kernel_weight(const Eigen::Ref<const Eigen::VectorXd>& xi,
                     const Eigen::Ref<const Eigen::VectorXd>& x, const Bandwidth& b,
                     const CovariateMeta& meta);

// Raw kernel weights of every subject relative to the query point.
Eigen::VectorXd kernel_weights(const SurvivalDataset& ds, const Eigen::Ref<const Eigen::VectorXd>& x,
                               const Bandwidth& b);

// Candidate values shared by every continuous covariate.
struct BandwidthGrid {
  std::vector<double> values;

  // `count` logarithmically spaced points from lo to hi inclusive.
  static BandwidthGrid log_spaced(double lo, double hi, std::size_t count);
  static BandwidthGrid standard();  // 30 points in [0.05, 2]
  // Parses "lo:hi:n".
  static BandwidthGrid parse(const std::string& spec);
};

// Scale on which cross-validation reads a bandwidth. unit_variance evaluates the
// criterion with the Epanechnikov kernel stretched to unit variance (support
// |u| <= sqrt 5), the convention of the usual CV selector software, and returns the
// value on that scale for direct use with the unit-support kernel above.
enum class CvKernelScale { unit_variance, unit_support };

double kernel_scale_factor(CvKernelScale scale) noexcept;

struct CvOptions {
  CvKernelScale kernel_scale = CvKernelScale::unit_variance;
  double cap = 2.0;
  std::size_t workers = 1;
  // Above this many continuous covariates the product grid is replaced by cyclic
  // coordinate search started from a seeded grid point.
  std::size_t exhaustive_max_dims = 2;
  std::size_t coordinate_sweeps = 4;
};

// Leave-one-out least-squares criterion for the Nadaraya-Watson estimate of
// P(Y <= t | X), summed over the distinct uncensored times.
double cv_criterion(const SurvivalDataset& ds, const Bandwidth& b,
                    CvKernelScale scale = CvKernelScale::unit_variance);

struct CvResult {
  Bandwidth bandwidth;       // after the cap
  Bandwidth raw_minimizer;   // before the cap
  double criterion = 0.0;
  std::size_t evaluations = 0;
};

CvResult cv_bandwidth_detail(const SurvivalDataset& ds, const std::optional<BandwidthGrid>& grid,
                             std::uint64_t seed, const CvOptions& options = {});

Bandwidth cv_bandwidth(const SurvivalDataset& ds, const std::optional<BandwidthGrid>& grid,
                       std::uint64_t seed, const CvOptions& options = {});

}  // namespace curemix
