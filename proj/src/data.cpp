#include "curemix/data.hpp"

#include "curemix/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unordered_map>

namespace curemix {

CovariateMeta CovariateMeta::unnamed(std::size_t x_cols, std::size_t z_cols) {
  CovariateMeta meta;
  for (std::size_t j = 0; j < x_cols; ++j) {
    meta.x_names.push_back("x" + std::to_string(j + 1));
    meta.x_kinds.push_back(CovariateKind::continuous);
    meta.x_mean.push_back(0.0);
    meta.x_sd.push_back(1.0);
  }
  for (std::size_t j = 0; j < z_cols; ++j) meta.z_names.push_back("z" + std::to_string(j + 1));
  return meta;
}

std::vector<std::size_t> CovariateMeta::continuous_columns() const {
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < x_kinds.size(); ++j)
    if (x_kinds[j] == CovariateKind::continuous) cols.push_back(j + 1);
  return cols;
}

std::vector<std::size_t> CovariateMeta::discrete_columns() const {
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < x_kinds.size(); ++j)
    if (x_kinds[j] == CovariateKind::discrete) cols.push_back(j + 1);
  return cols;
}

void CovariateMeta::validate(std::size_t p, std::size_t q) const {
  if (p == 0) throw DataError("X must contain the intercept column");
  const std::size_t k = p - 1;
  if (x_kinds.size() != k || x_names.size() != k || x_mean.size() != k || x_sd.size() != k)
    throw DataError("covariate metadata must have one entry per non-intercept X column");
  if (z_names.size() != q) throw DataError("covariate metadata must name every Z column");
  for (std::size_t j = 0; j < k; ++j) {
    if (x_kinds[j] == CovariateKind::continuous && !(x_sd[j] > 0.0))
      throw DegenerateCovariateError("non-positive scale for column " + x_names[j]);
  }
}

SurvivalDataset::SurvivalDataset(Eigen::VectorXd y, Eigen::VectorXi delta, Eigen::MatrixXd x,
                                 Eigen::MatrixXd z, CovariateMeta meta, EventPolicy policy)
    : y_(std::move(y)),
      delta_(std::move(delta)),
      x_(std::move(x)),
      z_(std::move(z)),
      meta_(std::move(meta)) {
  const Eigen::Index n = y_.size();
  if (n < 2) throw DataError("a dataset needs at least two subjects");
  if (delta_.size() != n || x_.rows() != n || z_.rows() != n)
    throw DataError("y, delta, X and Z must have the same number of rows");
  meta_.validate(p(), q());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(y_(i)) || y_(i) < 0.0)
      throw DataError("follow-up time must be finite and nonnegative (subject " +
                      std::to_string(i) + ")");
    if (delta_(i) != 0 && delta_(i) != 1)
      throw DataError("event indicator must be 0 or 1 (subject " + std::to_string(i) + ")");
    if (x_(i, 0) != 1.0) throw DataError("first X column must be the intercept");
    if (!x_.row(i).allFinite() || !z_.row(i).allFinite())
      throw DataError("covariates must be finite (subject " + std::to_string(i) + ")");
    events_ += static_cast<std::size_t>(delta_(i));
  }
  if (policy == EventPolicy::require && events_ == 0)
    throw DataError("dataset has no uncensored observation");
}

SurvivalDataset SurvivalDataset::from_subjects(const std::vector<Subject>& subjects,
                                               CovariateMeta meta, EventPolicy policy) {
  if (subjects.empty()) throw DataError("a dataset needs at least two subjects");
  const auto n = static_cast<Eigen::Index>(subjects.size());
  const Eigen::Index p = subjects.front().x.size();
  const Eigen::Index q = subjects.front().z.size();
  Eigen::VectorXd y(n);
  Eigen::VectorXi delta(n);
  Eigen::MatrixXd x(n, p);
  Eigen::MatrixXd z(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Subject& s = subjects[static_cast<std::size_t>(i)];
    if (s.x.size() != p || s.z.size() != q)
      throw DataError("all subjects must share covariate lengths");
    y(i) = s.y;
    delta(i) = s.delta;
    x.row(i) = s.x.transpose();
    z.row(i) = s.z.transpose();
  }
  return SurvivalDataset(std::move(y), std::move(delta), std::move(x), std::move(z),
                         std::move(meta), policy);
}

Subject SurvivalDataset::subject(std::size_t i) const {
  const auto r = static_cast<Eigen::Index>(i);
  return Subject{y_(r), delta_(r), x_.row(r).transpose(), z_.row(r).transpose()};
}

double SurvivalDataset::last_event_time() const {
  if (events_ == 0) throw DataError("dataset has no uncensored observation");
  double last = -1.0;
  for (Eigen::Index i = 0; i < y_.size(); ++i)
    if (delta_(i) == 1) last = std::max(last, y_(i));
  return last;
}

SurvivalDataset SurvivalDataset::subset(std::span<const std::size_t> rows,
                                        EventPolicy policy) const {
  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd y(m);
  Eigen::VectorXi delta(m);
  Eigen::MatrixXd x(m, x_.cols());
  Eigen::MatrixXd z(m, z_.cols());
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto r = static_cast<Eigen::Index>(rows[static_cast<std::size_t>(k)]);
    if (r >= y_.size()) throw DataError("subset row out of range");
    y(k) = y_(r);
    delta(k) = delta_(r);
    x.row(k) = x_.row(r);
    z.row(k) = z_.row(r);
  }
  return SurvivalDataset(std::move(y), std::move(delta), std::move(x), std::move(z), meta_,
                         policy);
}

SurvivalDataset SurvivalDataset::with_x(Eigen::MatrixXd x, CovariateMeta meta) const {
  return SurvivalDataset(y_, delta_, std::move(x), z_, std::move(meta),
                         events_ == 0 ? EventPolicy::allow_none : EventPolicy::require);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == ',' && !quoted) {
      cells.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  cells.push_back(trim(line.substr(start)));
  return cells;
}

double parse_number(std::string_view cell, std::size_t row, const std::string& column) {
  double value = 0.0;
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(value))
    throw ParseError(row, "non-numeric value '" + std::string(cell) + "' in column " + column);
  return value;
}

}  // namespace

SurvivalDataset parse_csv(const std::string& text, const Schema& schema, EventPolicy policy) {
  std::istringstream in(text);
  std::string line;
  bool first = true;
  // Leading '#' lines carry provenance comments written by the tool.
  do {
    if (!std::getline(in, line)) throw SchemaError("empty file: missing header row");
    if (first && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line = line.substr(3);
    first = false;
  } while (!line.empty() && line[0] == '#');

  const auto header = split_line(line);
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < header.size(); ++j) index.emplace(std::string(header[j]), j);

  auto column = [&](const std::string& name) -> std::size_t {
    auto it = index.find(name);
    if (it == index.end()) throw SchemaError("missing column '" + name + "'");
    return it->second;
  };
  if (schema.time.empty() || schema.status.empty())
    throw SchemaError("schema must name a time column and a status column");

  const std::size_t time_col = column(schema.time);
  const std::size_t status_col = column(schema.status);

  CovariateMeta meta;
  std::vector<std::size_t> x_cols;
  auto add_x = [&](const std::string& name, CovariateKind kind) {
    if (std::find(meta.x_names.begin(), meta.x_names.end(), name) != meta.x_names.end()) return;
    x_cols.push_back(column(name));
    meta.x_names.push_back(name);
    meta.x_kinds.push_back(kind);
    meta.x_mean.push_back(0.0);
    meta.x_sd.push_back(1.0);
  };
  for (const auto& name : schema.x) {
    const bool discrete = std::find(schema.x_discrete.begin(), schema.x_discrete.end(), name) !=
                          schema.x_discrete.end();
    add_x(name, discrete ? CovariateKind::discrete : CovariateKind::continuous);
  }
  for (const auto& name : schema.x_discrete) add_x(name, CovariateKind::discrete);

  std::vector<std::size_t> z_cols;
  for (const auto& name : schema.z) {
    z_cols.push_back(column(name));
    meta.z_names.push_back(name);
  }

  std::vector<double> ys;
  std::vector<int> deltas;
  std::vector<double> xs;
  std::vector<double> zs;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw ParseError(row, "expected " + std::to_string(header.size()) + " cells, found " +
                                std::to_string(cells.size()));
    const double y = parse_number(cells[time_col], row, schema.time);
    if (y < 0.0) throw ParseError(row, "negative follow-up time");
    const double status = parse_number(cells[status_col], row, schema.status);
    if (status != 0.0 && status != 1.0)
      throw ParseError(row, "status must be 0 or 1, found " + std::string(cells[status_col]));
    ys.push_back(y);
    deltas.push_back(static_cast<int>(status));
    for (std::size_t k = 0; k < x_cols.size(); ++k)
      xs.push_back(parse_number(cells[x_cols[k]], row, meta.x_names[k]));
    for (std::size_t k = 0; k < z_cols.size(); ++k)
      zs.push_back(parse_number(cells[z_cols[k]], row, meta.z_names[k]));
  }

  const auto n = static_cast<Eigen::Index>(ys.size());
  const auto px = static_cast<Eigen::Index>(x_cols.size());
  const auto q = static_cast<Eigen::Index>(z_cols.size());
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
  Eigen::VectorXi delta = Eigen::Map<const Eigen::VectorXi>(deltas.data(), n);
  Eigen::MatrixXd x(n, px + 1);
  Eigen::MatrixXd z(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (Eigen::Index k = 0; k < px; ++k) x(i, k + 1) = xs[static_cast<std::size_t>(i * px + k)];
    for (Eigen::Index k = 0; k < q; ++k) z(i, k) = zs[static_cast<std::size_t>(i * q + k)];
  }
  return SurvivalDataset(std::move(y), std::move(delta), std::move(x), std::move(z),
                         std::move(meta), policy);
}

SurvivalDataset load_csv(const std::filesystem::path& path, const Schema& schema,
                         EventPolicy policy) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), schema, policy);
}

namespace {

std::vector<std::string> z_only_names(const CovariateMeta& meta) {
  std::vector<std::string> names;
  for (const auto& name : meta.z_names)
    if (std::find(meta.x_names.begin(), meta.x_names.end(), name) == meta.x_names.end())
      names.push_back(name);
  return names;
}

}  // namespace

std::string to_csv(const SurvivalDataset& ds, const std::string& time_name,
                   const std::string& status_name) {
  const CovariateMeta& meta = ds.meta();
  const auto extra = z_only_names(meta);
  std::ostringstream out;
  out << std::setprecision(17);
  out << time_name << ',' << status_name;
  for (const auto& name : meta.x_names) out << ',' << name;
  for (const auto& name : extra) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < ds.n(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out << ds.y()(r) << ',' << ds.delta()(r);
    for (std::size_t j = 1; j < ds.p(); ++j) out << ',' << ds.x()(r, static_cast<Eigen::Index>(j));
    for (const auto& name : extra) {
      const auto k = std::find(meta.z_names.begin(), meta.z_names.end(), name) -
                     meta.z_names.begin();
      out << ',' << ds.z()(r, k);
    }
    out << '\n';
  }
  return out.str();
}

void write_csv(const SurvivalDataset& ds, const std::filesystem::path& path,
               const std::string& time_name, const std::string& status_name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_csv(ds, time_name, status_name);
}

Schema schema_of(const SurvivalDataset& ds, const std::string& time_name,
                 const std::string& status_name) {
  Schema schema;
  schema.time = time_name;
  schema.status = status_name;
  const CovariateMeta& meta = ds.meta();
  for (std::size_t j = 0; j < meta.x_columns(); ++j) {
    schema.x.push_back(meta.x_names[j]);
    if (meta.x_kinds[j] == CovariateKind::discrete) schema.x_discrete.push_back(meta.x_names[j]);
  }
  schema.z = meta.z_names;
  return schema;
}

std::pair<SurvivalDataset, CovariateMeta> standardize_continuous(const SurvivalDataset& ds) {
  CovariateMeta meta = ds.meta();
  Eigen::MatrixXd x = ds.x();
  const double n = static_cast<double>(ds.n());
  for (std::size_t col : meta.continuous_columns()) {
    const auto c = static_cast<Eigen::Index>(col);
    auto column = x.col(c);
    const double mean = column.mean();
    const double var = (column.array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    if (!(sd > 0.0) || sd <= 1e-14 * std::max(1.0, std::abs(mean)))
      throw DegenerateCovariateError("continuous covariate '" + meta.x_names[col - 1] +
                                     "' is constant");
    column = (column.array() - mean) / sd;
    // Compose with any earlier transform so meta always refers to the raw scale.
    const double old_mean = meta.x_mean[col - 1];
    const double old_sd = meta.x_sd[col - 1];
    meta.x_mean[col - 1] = old_mean + old_sd * mean;
    meta.x_sd[col - 1] = old_sd * sd;
  }
  meta.standardized = true;
  SurvivalDataset out = ds.with_x(std::move(x), meta);
  return {std::move(out), std::move(meta)};
}

double destandardize_value(const CovariateMeta& meta, std::size_t col, double value) {
  if (col == 0 || col > meta.x_columns()) throw ConfigError("column index out of range");
  return meta.x_mean[col - 1] + meta.x_sd[col - 1] * value;
}

Eigen::VectorXd destandardize_gamma(const Eigen::VectorXd& gamma, const CovariateMeta& meta) {
  if (static_cast<std::size_t>(gamma.size()) != meta.x_columns() + 1)
    throw ConfigError("gamma length does not match covariate metadata");
  Eigen::VectorXd out = gamma;
  for (std::size_t j = 1; j <= meta.x_columns(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    out(k) = gamma(k) / meta.x_sd[j - 1];
    out(0) -= gamma(k) * meta.x_mean[j - 1] / meta.x_sd[j - 1];
  }
  return out;
}

}  // namespace curemix
