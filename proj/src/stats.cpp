#include "lvar/stats.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lvar/rng.hpp"

namespace lvar {

namespace {

// Near-zero variance threshold shared by z-scoring and pearson: a column
// whose sample standard deviation is this small relative to its mean is
// constant up to rounding.
bool degenerate_std(double sd, double mean) {
  return sd <= 1e-12 * std::max(1.0, std::abs(mean));
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;  // sample (n-1)
};

Moments moments(std::span<const double> x) {
  const auto n = static_cast<double>(x.size());
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return Moments{mean, std::sqrt(ss / (n - 1.0))};
}

Eigen::VectorXd zscore(const std::vector<double>& col, const std::string& name) {
  if (col.size() < 2) {
    throw std::domain_error("column '" + name + "' too short to standardize");
  }
  Moments m = moments(col);
  if (degenerate_std(m.sd, m.mean)) {
    throw std::domain_error("column '" + name + "' has zero variance");
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(col.size()));
  for (std::size_t i = 0; i < col.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = (col[i] - m.mean) / m.sd;
  }
  return out;
}

// Type-7 quantile (linear interpolation between order statistics).
double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) {
    throw std::domain_error("quantile of empty sample");
  }
  const double h = static_cast<double>(sorted.size() - 1) * prob;
  const auto idx = static_cast<std::size_t>(h);
  if (idx + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(idx);
  return sorted[idx] + frac * (sorted[idx + 1] - sorted[idx]);
}

}  // namespace

void DataTable::add_column(std::string name, std::vector<double> values) {
  if (has_column(name)) {
    throw std::invalid_argument("duplicate column '" + name + "'");
  }
  if (!names_.empty() && values.size() != n_rows_) {
    throw std::invalid_argument("column '" + name + "' has " +
                                std::to_string(values.size()) +
                                " rows, table has " + std::to_string(n_rows_));
  }
  if (names_.empty()) n_rows_ = values.size();
  names_.push_back(std::move(name));
  cols_.push_back(std::move(values));
}

void DataTable::set_row_ids(std::vector<std::string> ids) {
  if (!names_.empty() && ids.size() != n_rows_) {
    throw std::invalid_argument("row id count mismatch");
  }
  if (names_.empty()) n_rows_ = ids.size();
  row_ids_ = std::move(ids);
}

bool DataTable::has_column(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& DataTable::column(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw std::invalid_argument("no column named '" + name + "'");
  }
  return cols_[static_cast<std::size_t>(it - names_.begin())];
}

DataTable DataTable::subset(const std::vector<std::size_t>& row_indices) const {
  DataTable out;
  for (std::size_t c = 0; c < names_.size(); ++c) {
    std::vector<double> col;
    col.reserve(row_indices.size());
    for (std::size_t r : row_indices) col.push_back(cols_[c].at(r));
    out.add_column(names_[c], std::move(col));
  }
  if (!row_ids_.empty()) {
    std::vector<std::string> ids;
    ids.reserve(row_indices.size());
    for (std::size_t r : row_indices) ids.push_back(row_ids_.at(r));
    out.set_row_ids(std::move(ids));
  }
  return out;
}

DataTable DataTable::sorted_by_id() const {
  if (row_ids_.empty()) return *this;
  std::vector<std::size_t> order(n_rows_);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [this](std::size_t a, std::size_t b) {
                     return row_ids_[a] < row_ids_[b];
                   });
  return subset(order);
}

void validate(const RegressionSpec& spec) {
  if (spec.predictors.empty()) {
    throw std::invalid_argument("regression spec needs at least one predictor");
  }
  std::vector<std::string> names = spec.predictors;
  names.push_back(spec.dependent);
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) {
    throw std::invalid_argument("regression spec has repeated column names");
  }
}

std::string ci_method_name(CiMethod m) {
  return m == CiMethod::Bootstrap ? "bootstrap" : "fisher";
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("pearson requires equal-length columns");
  }
  if (x.size() < 3) {
    throw std::invalid_argument("pearson requires at least 3 observations");
  }
  Moments mx = moments(x);
  Moments my = moments(y);
  if (degenerate_std(mx.sd, mx.mean)) {
    throw std::domain_error("pearson: first column has zero variance");
  }
  if (degenerate_std(my.sd, my.mean)) {
    throw std::domain_error("pearson: second column has zero variance");
  }
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx.mean) * (y[i] - my.mean);
  }
  const double n1 = static_cast<double>(x.size()) - 1.0;
  return sxy / (n1 * mx.sd * my.sd);
}

namespace {

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&x](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("spearman requires equal-length columns");
  }
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

RegressionResult ols_standardized(const DataTable& data,
                                  const RegressionSpec& spec) {
  validate(spec);
  const std::size_t n = data.n_rows();
  const std::size_t p = spec.predictors.size();
  if (n <= p + 1) {
    throw std::domain_error("need more than " + std::to_string(p + 1) +
                            " rows for " + std::to_string(p) +
                            " predictors, got " + std::to_string(n));
  }

  Eigen::VectorXd y = zscore(data.column(spec.dependent), spec.dependent);
  Eigen::MatrixXd design(static_cast<Eigen::Index>(n),
                         static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) {
    design.col(static_cast<Eigen::Index>(j)) =
        zscore(data.column(spec.predictors[j]), spec.predictors[j]);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < static_cast<Eigen::Index>(p)) {
    const auto& perm = qr.colsPermutation().indices();
    std::string names;
    for (Eigen::Index i = qr.rank(); i < static_cast<Eigen::Index>(p); ++i) {
      if (!names.empty()) names += ", ";
      names += spec.predictors[static_cast<std::size_t>(perm[i])];
    }
    throw std::domain_error("design matrix is rank deficient; collinear columns: " +
                            names);
  }

  Eigen::VectorXd beta = qr.solve(y);
  const double rss = (y - design * beta).squaredNorm();
  const double tss = y.squaredNorm();
  double r2 = 1.0 - rss / tss;
  r2 = std::clamp(r2, 0.0, 1.0);

  RegressionResult result;
  result.predictors = spec.predictors;
  result.betas.assign(beta.data(), beta.data() + beta.size());
  result.r2 = r2;
  result.n = n;
  return result;
}

double r2_delta(const DataTable& data, const RegressionSpec& small_spec,
                const RegressionSpec& full_spec) {
  if (small_spec.dependent != full_spec.dependent ||
      small_spec.standardize != full_spec.standardize) {
    throw std::invalid_argument("r2_delta requires matching dependent variables");
  }
  for (const auto& name : small_spec.predictors) {
    if (std::find(full_spec.predictors.begin(), full_spec.predictors.end(),
                  name) == full_spec.predictors.end()) {
      throw std::invalid_argument("specs are not nested: '" + name +
                                  "' missing from the full model");
    }
  }
  RegressionResult small_fit = ols_standardized(data, small_spec);
  RegressionResult full_fit = ols_standardized(data, full_spec);
  return full_fit.r2 - small_fit.r2;
}

BootstrapFit bootstrap_fit(const DataTable& data, const RegressionSpec& spec,
                           const BootstrapOptions& options) {
  validate(spec);
  if (options.replicates < 100) {
    throw std::invalid_argument("bootstrap needs B >= 100, got " +
                                std::to_string(options.replicates));
  }
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw std::invalid_argument("confidence level must lie in (0, 1)");
  }

  const DataTable table = data.sorted_by_id();
  const std::size_t n = table.n_rows();
  const std::size_t p = spec.predictors.size();
  const int B = options.replicates;

  std::vector<double> r2s;
  r2s.reserve(static_cast<std::size_t>(B));
  std::vector<std::vector<double>> betas(p);
  int skipped = 0;
  std::vector<std::size_t> idx(n);
  for (int b = 0; b < B; ++b) {
    CounterRng rng(options.seed, static_cast<std::uint64_t>(b));
    for (std::size_t i = 0; i < n; ++i) {
      idx[i] = static_cast<std::size_t>(rng.uniform_below(n));
    }
    RegressionResult fit;
    try {
      fit = ols_standardized(table.subset(idx), spec);
    } catch (const std::domain_error&) {
      ++skipped;
      continue;
    }
    r2s.push_back(fit.r2);
    for (std::size_t j = 0; j < p; ++j) betas[j].push_back(fit.betas[j]);
  }

  if (static_cast<double>(skipped) > 0.01 * static_cast<double>(B)) {
    throw std::runtime_error("bootstrap skipped " + std::to_string(skipped) +
                             " of " + std::to_string(B) +
                             " replicates (degenerate resamples)");
  }

  std::sort(r2s.begin(), r2s.end());
  const double alpha = 1.0 - options.level;
  BootstrapFit out;
  out.r2_ci = CiBound{quantile_sorted(r2s, alpha / 2.0),
                      quantile_sorted(r2s, 1.0 - alpha / 2.0),
                      CiMethod::Bootstrap};
  out.skipped = skipped;
  out.beta_se.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    out.beta_se[j] = moments(betas[j]).sd;
  }
  return out;
}

std::pair<double, double> bootstrap_r2_ci(const DataTable& data,
                                          const RegressionSpec& spec, int B,
                                          std::uint64_t seed, double level) {
  BootstrapFit fit = bootstrap_fit(data, spec, BootstrapOptions{B, seed, level});
  return {fit.r2_ci.lo, fit.r2_ci.hi};
}

std::pair<double, double> fisher_r2_ci(double r, std::size_t n, double level) {
  if (!(std::abs(r) < 1.0)) {
    throw std::domain_error("fisher interval undefined at |r| = 1");
  }
  if (n < 4) {
    throw std::invalid_argument("fisher interval needs n >= 4, got " +
                                std::to_string(n));
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence level must lie in (0, 1)");
  }
  const double z = std::atanh(r);
  const boost::math::normal_distribution<double> unit_normal;
  const double z_crit =
      boost::math::quantile(unit_normal, 1.0 - (1.0 - level) / 2.0);
  const double half_width = z_crit / std::sqrt(static_cast<double>(n - 3));
  const double r_lo = std::tanh(z - half_width);
  const double r_hi = std::tanh(z + half_width);
  if (r_lo <= 0.0 && 0.0 <= r_hi) {
    return {0.0, std::max(r_lo * r_lo, r_hi * r_hi)};
  }
  const double lo = r_lo * r_lo;
  const double hi = r_hi * r_hi;
  return {std::min(lo, hi), std::max(lo, hi)};
}

void validate(const SimilarityRecord& rec) {
  if (rec.pair_id.empty()) {
    throw std::invalid_argument("similarity record has empty pair_id");
  }
  if (!(rec.length_ratio > 0.0 && rec.length_ratio <= 1.0)) {
    throw std::invalid_argument("record '" + rec.pair_id +
                                "': length_ratio must lie in (0, 1], got " +
                                std::to_string(rec.length_ratio));
  }
  if (!(rec.shared_fraction >= 0.0 && rec.shared_fraction <= 1.0)) {
    throw std::invalid_argument("record '" + rec.pair_id +
                                "': shared_fraction must lie in [0, 1]");
  }
  for (const auto& [metric, value] : rec.similarity) {
    if (!std::isfinite(value)) {
      throw std::invalid_argument("record '" + rec.pair_id +
                                  "': non-finite similarity for " + metric);
    }
  }
  if (rec.lengths.has_value()) {
    auto [m, n] = *rec.lengths;
    if (m < 1 || n < 1) {
      throw std::invalid_argument("record '" + rec.pair_id +
                                  "': lengths must be >= 1");
    }
    double expected = static_cast<double>(std::min(m, n)) /
                      static_cast<double>(std::max(m, n));
    if (std::abs(rec.length_ratio - expected) > 1e-12) {
      throw std::invalid_argument("record '" + rec.pair_id +
                                  "': length_ratio " +
                                  std::to_string(rec.length_ratio) +
                                  " inconsistent with lengths");
    }
  }
}

DataTable records_to_table(const std::vector<SimilarityRecord>& records,
                           const std::string& metric) {
  std::vector<const SimilarityRecord*> selected;
  for (const auto& rec : records) {
    if (rec.similarity.count(metric) != 0) selected.push_back(&rec);
  }
  std::stable_sort(selected.begin(), selected.end(),
                   [](const SimilarityRecord* a, const SimilarityRecord* b) {
                     return a->pair_id < b->pair_id;
                   });

  bool all_depth = !selected.empty();
  for (const auto* rec : selected) {
    validate(*rec);
    all_depth = all_depth && rec->depth_range.has_value();
  }

  std::vector<std::string> ids;
  std::vector<double> similarity;
  std::vector<double> ratio;
  std::vector<double> shared;
  std::vector<double> depth;
  for (const auto* rec : selected) {
    ids.push_back(rec->pair_id);
    similarity.push_back(rec->similarity.at(metric));
    ratio.push_back(rec->length_ratio);
    shared.push_back(rec->shared_fraction);
    if (all_depth) depth.push_back(*rec->depth_range);
  }

  DataTable table;
  table.add_column("similarity", std::move(similarity));
  table.add_column("length_ratio", std::move(ratio));
  if (all_depth) table.add_column("depth_range", std::move(depth));
  table.add_column("shared_fraction", std::move(shared));
  table.set_row_ids(std::move(ids));
  return table;
}

ConfoundRow confound_row(const std::vector<SimilarityRecord>& records,
                         const std::string& metric,
                         const ConfoundOptions& options) {
  DataTable table = records_to_table(records, metric);
  const std::size_t n = table.n_rows();
  if (n < 10) {
    throw std::domain_error("confound table for metric '" + metric +
                            "' requires at least 10 records, got " +
                            std::to_string(n));
  }

  RegressionSpec length_spec{"similarity", {"length_ratio"}, true};
  std::vector<std::string> full_predictors{"length_ratio"};
  if (table.has_column("depth_range")) full_predictors.push_back("depth_range");
  full_predictors.push_back("shared_fraction");
  RegressionSpec full_spec{"similarity", full_predictors, true};

  ConfoundRow row;
  row.metric = metric;
  row.n = n;
  row.r_univ = pearson(table.column("length_ratio"), table.column("similarity"));
  row.r2_length_only = ols_standardized(table, length_spec).r2;

  RegressionResult full_fit = ols_standardized(table, full_spec);
  row.r2_full = full_fit.r2;
  row.predictors = full_fit.predictors;
  row.betas = full_fit.betas;
  row.r2_delta_vs_length = r2_delta(table, length_spec, full_spec);

  BootstrapOptions boot{options.bootstrap_replicates, options.seed,
                        options.level};
  if (options.ci == CiMethod::Bootstrap) {
    row.length_ci = bootstrap_fit(table, length_spec, boot).r2_ci;
  } else {
    auto [lo, hi] = fisher_r2_ci(row.r_univ, n, options.level);
    row.length_ci = CiBound{lo, hi, CiMethod::Fisher};
  }

  BootstrapFit full_boot = bootstrap_fit(table, full_spec, boot);
  const boost::math::normal_distribution<double> unit_normal;
  row.p_proxies.resize(row.betas.size());
  for (std::size_t j = 0; j < row.betas.size(); ++j) {
    const double se = full_boot.beta_se[j];
    if (se <= 0.0) {
      row.p_proxies[j] = row.betas[j] == 0.0 ? 1.0 : 0.0;
    } else {
      row.p_proxies[j] =
          2.0 * boost::math::cdf(unit_normal, -std::abs(row.betas[j]) / se);
    }
  }
  return row;
}

std::vector<ConfoundRow> confound_table(
    const std::vector<SimilarityRecord>& records,
    const std::vector<std::string>& metrics, const ConfoundOptions& options) {
  std::vector<ConfoundRow> rows;
  rows.reserve(metrics.size());
  for (const auto& metric : metrics) {
    rows.push_back(confound_row(records, metric, options));
  }
  return rows;
}

}  // namespace lvar
