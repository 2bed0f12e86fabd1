#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace curemix {

enum class CovariateKind { continuous, discrete };

// Per-column description of the incidence covariates beyond the intercept,
// plus the latency covariate names. Column j of `x_*` describes X column j+1.
struct CovariateMeta {
  std::vector<std::string> x_names;
  std::vector<CovariateKind> x_kinds;
  // Location/scale used for standardization; (0, 1) when a column is untouched.
  std::vector<double> x_mean;
  std::vector<double> x_sd;
  bool standardized = false;
  std::vector<std::string> z_names;

  // Metadata for `p_minus_1` continuous, unstandardized columns named x1, x2, ...
  static CovariateMeta unnamed(std::size_t x_cols, std::size_t z_cols);

  std::size_t x_columns() const noexcept { return x_kinds.size(); }
  // Indices into the full X matrix (intercept is column 0, so all results are >= 1).
  std::vector<std::size_t> continuous_columns() const;
  std::vector<std::size_t> discrete_columns() const;

  void validate(std::size_t p, std::size_t q) const;
};

struct Subject {
  double y = 0.0;
  int delta = 0;
  Eigen::VectorXd x;
  Eigen::VectorXd z;
};

enum class EventPolicy { require, allow_none };

// Immutable right-censored sample. Column 0 of X is the intercept (all ones).
class SurvivalDataset {
 public:
  SurvivalDataset(Eigen::VectorXd y, Eigen::VectorXi delta, Eigen::MatrixXd x,
                  Eigen::MatrixXd z, CovariateMeta meta,
                  EventPolicy policy = EventPolicy::require);

  static SurvivalDataset from_subjects(const std::vector<Subject>& subjects, CovariateMeta meta,
                                       EventPolicy policy = EventPolicy::require);

  std::size_t n() const noexcept { return static_cast<std::size_t>(y_.size()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(x_.cols()); }
  std::size_t q() const noexcept { return static_cast<std::size_t>(z_.cols()); }

  const Eigen::VectorXd& y() const noexcept { return y_; }
  const Eigen::VectorXi& delta() const noexcept { return delta_; }
  const Eigen::MatrixXd& x() const noexcept { return x_; }
  const Eigen::MatrixXd& z() const noexcept { return z_; }
  const CovariateMeta& meta() const noexcept { return meta_; }

  bool is_event(std::size_t i) const { return delta_(static_cast<Eigen::Index>(i)) == 1; }
  Subject subject(std::size_t i) const;

  std::size_t event_count() const noexcept { return events_; }
  // Largest uncensored follow-up time; throws DataError when there are no events.
  double last_event_time() const;

  // Rows in the given order (duplicates allowed, as in bootstrap resamples).
  SurvivalDataset subset(std::span<const std::size_t> rows,
                         EventPolicy policy = EventPolicy::require) const;
  SurvivalDataset with_x(Eigen::MatrixXd x, CovariateMeta meta) const;

 private:
  Eigen::VectorXd y_;
  Eigen::VectorXi delta_;
  Eigen::MatrixXd x_;
  Eigen::MatrixXd z_;
  CovariateMeta meta_;
  std::size_t events_ = 0;
};

// Column roles for CSV ingestion. Columns listed in `x_discrete` are incidence
// covariates matched exactly by the kernel; they may or may not also appear in `x`.
struct Schema {
  std::string time;
  std::string status;
  std::vector<std::string> x;
  std::vector<std::string> x_discrete;
  std::vector<std::string> z;
};

SurvivalDataset load_csv(const std::filesystem::path& path, const Schema& schema,
                         EventPolicy policy = EventPolicy::require);
SurvivalDataset parse_csv(const std::string& text, const Schema& schema,
                          EventPolicy policy = EventPolicy::require);

// Writes time, status and every named covariate once (X names first, then Z-only names).
void write_csv(const SurvivalDataset& ds, const std::filesystem::path& path,
               const std::string& time_name = "time", const std::string& status_name = "status");
std::string to_csv(const SurvivalDataset& ds, const std::string& time_name = "time",
                   const std::string& status_name = "status");

// Schema that reads back what write_csv produced.
Schema schema_of(const SurvivalDataset& ds, const std::string& time_name = "time",
                 const std::string& status_name = "status");

// Centers and scales the continuous X columns with the population standard deviation.
std::pair<SurvivalDataset, CovariateMeta> standardize_continuous(const SurvivalDataset& ds);

// Maps a value of X column `col` (>= 1) back to the original scale.
double destandardize_value(const CovariateMeta& meta, std::size_t col, double value);

// Incidence coefficients for the original covariate scale from coefficients fitted on
// standardized covariates, so that gamma'x_std == result'x_raw.
Eigen::VectorXd destandardize_gamma(const Eigen::VectorXd& gamma, const CovariateMeta& meta);

}  // namespace curemix
