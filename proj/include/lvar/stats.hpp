#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lvar {

// Column-oriented numeric table with optional row ids. Row ids are what the
// bootstrap canonicalizes on, so results do not depend on ingestion order.
class DataTable {
 public:
  void add_column(std::string name, std::vector<double> values);
  void set_row_ids(std::vector<std::string> ids);

  bool has_column(const std::string& name) const;
  const std::vector<double>& column(const std::string& name) const;
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::string>& row_ids() const { return row_ids_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return names_.size(); }

  // Row-gather (indices may repeat; ids follow the gather).
  DataTable subset(const std::vector<std::size_t>& row_indices) const;
  // Copy with rows stably sorted by id; identity when ids are absent.
  DataTable sorted_by_id() const;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> cols_;
  std::vector<std::string> row_ids_;
  std::size_t n_rows_ = 0;
};

struct RegressionSpec {
  std::string dependent;
  std::vector<std::string> predictors;
  bool standardize = true;
};

void validate(const RegressionSpec& spec);

enum class CiMethod { Bootstrap, Fisher };
std::string ci_method_name(CiMethod m);

struct CiBound {
  double lo = 0.0;
  double hi = 0.0;
  CiMethod method = CiMethod::Bootstrap;
};

struct RegressionResult {
  std::vector<std::string> predictors;
  std::vector<double> betas;  // standardized coefficients, spec order
  double r2 = 0.0;
  std::optional<double> r2_length_only;
  std::size_t n = 0;
  std::map<std::string, CiBound> ci;  // keyed by quantity name, e.g. "r2"
};

// Sample Pearson correlation; needs n >= 3 and nonzero variance on both sides.
double pearson(std::span<const double> x, std::span<const double> y);

// Spearman rank correlation (average ranks on ties).
double spearman(std::span<const double> x, std::span<const double> y);

// Z-scores the dependent and predictor columns (sample n-1 standard
// deviation) and solves least squares by rank-revealing column-pivoted QR.
// Rank deficiency and (near-)constant columns are rejected with the column
// names; degenerate data throws std::domain_error, structural misuse
// std::invalid_argument.
RegressionResult ols_standardized(const DataTable& data,
                                  const RegressionSpec& spec);

// r2(full) - r2(small) for nested predictor sets; >= -1e-12 by nesting.
double r2_delta(const DataTable& data, const RegressionSpec& small_spec,
                const RegressionSpec& full_spec);

struct BootstrapOptions {
  int replicates = 5000;
  std::uint64_t seed = 0;
  double level = 0.95;
};

struct BootstrapFit {
  CiBound r2_ci;                // percentile interval of R^2
  std::vector<double> beta_se;  // bootstrap standard errors, spec order
  int skipped = 0;              // degenerate resamples (zero variance / rank)
};

// Row resampling with replacement; replicate b draws its indices from the
// substream (seed, b), so the interval is reproducible for any evaluation
// order. Rows are sorted by id first. Degenerate replicates are skipped and
// counted; more than 1% skipped is an error.
BootstrapFit bootstrap_fit(const DataTable& data, const RegressionSpec& spec,
                           const BootstrapOptions& options);

std::pair<double, double> bootstrap_r2_ci(const DataTable& data,
                                          const RegressionSpec& spec, int B,
                                          std::uint64_t seed,
                                          double level = 0.95);

// Fisher-z interval for a correlation, re-expressed on the R^2 scale as the
// image of the r-interval under squaring (an r-interval straddling zero has
// R^2 lower bound 0).
std::pair<double, double> fisher_r2_ci(double r, std::size_t n,
                                       double level = 0.95);

// One input pair's similarity values plus confound covariates.
struct SimilarityRecord {
  std::string pair_id;
  std::map<std::string, double> similarity;  // metric name -> value
  double length_ratio = 0.0;
  std::optional<double> depth_range;  // ingested, absent when unavailable
  double shared_fraction = 0.0;
  std::optional<std::pair<std::int64_t, std::int64_t>> lengths;
};

void validate(const SimilarityRecord& rec);

struct ConfoundOptions {
  int bootstrap_replicates = 1000;
  std::uint64_t seed = 0;
  double level = 0.95;
  CiMethod ci = CiMethod::Bootstrap;
};

// One table row per metric: length-only fit, full fit, univariate r, CI.
struct ConfoundRow {
  std::string metric;
  std::size_t n = 0;
  double r_univ = 0.0;
  double r2_length_only = 0.0;
  CiBound length_ci;
  double r2_full = 0.0;
  std::vector<std::string> predictors;  // full-model predictors
  std::vector<double> betas;
  std::vector<double> p_proxies;  // normal approximation of beta / bootstrap SE
  double r2_delta_vs_length = 0.0;
};

// Rows with the metric present, canonically sorted by pair_id, as a table
// with columns: similarity (the DV), length_ratio, shared_fraction, and
// depth_range when every selected record carries it.
DataTable records_to_table(const std::vector<SimilarityRecord>& records,
                           const std::string& metric);

ConfoundRow confound_row(const std::vector<SimilarityRecord>& records,
                         const std::string& metric,
                         const ConfoundOptions& options);

std::vector<ConfoundRow> confound_table(
    const std::vector<SimilarityRecord>& records,
    const std::vector<std::string>& metrics, const ConfoundOptions& options);

}  // namespace lvar
