#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lvar/align.hpp"
#include "lvar/bundle.hpp"
#include "lvar/core.hpp"
#include "lvar/metrics.hpp"
#include "lvar/stats.hpp"

namespace lvar {

struct AuditConfig {
  std::filesystem::path bundle_dir;
  std::vector<Metric> metrics{Metric::MeanPooledCosine, Metric::LinearCKA};
  std::optional<LayerRange> layers;  // default: middle-layers rule
  std::optional<std::string> reference_language;
  std::size_t min_shared = 3;
  int bootstrap_replicates = 1000;
  std::uint64_t seed = 0;
  CiMethod ci = CiMethod::Bootstrap;
  double ci_level = 0.95;
  bool cka_center_columns = true;
  ProximityBaseline baseline = ProximityBaseline::IncludeReference;
  SharedFractionMode shared_fraction_mode = SharedFractionMode::TypeJaccard;
};

void validate(const AuditConfig& cfg);

// Raw mean CKA per language pair with across-pair standard deviation.
struct CkaLevelRow {
  std::string language_pair;
  double mean_cka = 0.0;
  double std_cka = 0.0;
  std::size_t n = 0;
};

struct AuditTotals {
  std::size_t problems = 0;
  std::size_t language_pairs = 0;
  std::size_t raw_pairs_total = 0;  // problems x language pairs
  // Raw pair level, per metric:
  std::map<std::string, std::size_t> included;
  std::map<std::string, std::size_t> excluded;
  // Dependent-variable level (proximity mode only), per metric:
  std::map<std::string, std::size_t> dv_included;
  std::map<std::string, std::size_t> dv_excluded;
};

struct AuditReport {
  std::string source;  // bundle directory or input CSV
  std::vector<std::string> metric_names;
  LayerRange layers_used;
  std::vector<std::string> languages;
  bool proximity_mode = false;
  std::string reference_language;  // empty in raw mode

  // DV records: proximity per (problem, target) in reference mode, raw
  // similarity per (problem, language pair) otherwise.
  std::vector<SimilarityRecord> dv_records;
  std::vector<SimilarityRecord> raw_records;

  std::vector<ConfoundRow> regression;   // on dv_records
  std::vector<ConfoundRow> crossdomain;  // on raw_records (length focus)
  // Metrics whose fit was degenerate (e.g. constant similarity), with the
  // reason; such metrics have no row above.
  std::map<std::string, std::string> regression_errors;
  std::map<std::string, std::string> crossdomain_errors;

  std::vector<CkaLevelRow> cka_levels;
  AuditTotals totals;
};

AuditReport run_audit(const AuditConfig& cfg);
AuditReport run_audit(const ActivationBundle& bundle, const AuditConfig& cfg);

// Writes table_regression.csv, table_metrics.csv, table_crossdomain.csv,
// table_cka_levels.csv, fig_<metric>_<covariate>.csv and audit.json into
// `dir`. Emission is deterministic: fixed column order, 6-significant-digit
// numbers, sorted rows.
void emit_report(const AuditReport& report, const AuditConfig& cfg,
                 const std::filesystem::path& dir);

}  // namespace lvar
