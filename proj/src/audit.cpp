#include "lvar/audit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <stdexcept>

#include "lvar/csv.hpp"

namespace lvar {

void validate(const AuditConfig& cfg) {
  if (cfg.metrics.empty()) {
    throw std::invalid_argument("audit requires a non-empty metric set");
  }
  std::set<std::string> seen;
  bool matrix_metric = false;
  for (Metric m : cfg.metrics) {
    if (!seen.insert(metric_name(m)).second) {
      throw std::invalid_argument("duplicate metric '" + metric_name(m) + "'");
    }
    matrix_metric = matrix_metric || m != Metric::MeanPooledCosine;
  }
  if (matrix_metric && cfg.min_shared < 2) {
    throw std::invalid_argument(
        "matrix metrics need min_shared >= 2, got " +
        std::to_string(cfg.min_shared));
  }
  if (cfg.bootstrap_replicates < 100) {
    throw std::invalid_argument("bootstrap replicates must be >= 100, got " +
                                std::to_string(cfg.bootstrap_replicates));
  }
  if (!(cfg.ci_level > 0.0 && cfg.ci_level < 1.0)) {
    throw std::invalid_argument("ci_level must lie in (0, 1)");
  }
}

namespace {

SimilarityRecord make_record(const std::string& pair_id,
                             const SequenceEntry& a, const SequenceEntry& b,
                             SharedFractionMode mode) {
  SimilarityRecord rec;
  rec.pair_id = pair_id;
  rec.lengths = std::pair<std::int64_t, std::int64_t>{
      static_cast<std::int64_t>(a.length()),
      static_cast<std::int64_t>(b.length())};
  rec.length_ratio = length_ratio(static_cast<std::size_t>(a.length()),
                                  static_cast<std::size_t>(b.length()));
  rec.shared_fraction = shared_token_fraction(a.tokens, b.tokens, mode);
  if (a.depth.has_value() && b.depth.has_value()) {
    rec.depth_range = std::abs(*a.depth - *b.depth);
  }
  return rec;
}

double aggregate_metric(const SequenceEntry& a, const SequenceEntry& b,
                        Metric metric, const LayerRange& range,
                        const std::optional<AlignedPositions>& alignment,
                        const MetricOptions& options) {
  std::vector<SimilarityValue> per_layer;
  per_layer.reserve(static_cast<std::size_t>(range.hi - range.lo + 1));
  for (int layer = range.lo; layer <= range.hi; ++layer) {
    per_layer.push_back(pairwise_similarity(
        a.layers[static_cast<std::size_t>(layer)],
        b.layers[static_cast<std::size_t>(layer)], metric, alignment, options));
  }
  return aggregate_over_layers(per_layer, range);
}

}  // namespace

AuditReport run_audit(const AuditConfig& cfg) {
  return run_audit(read_bundle(cfg.bundle_dir), cfg);
}

AuditReport run_audit(const ActivationBundle& bundle, const AuditConfig& cfg) {
  validate(cfg);
  validate(bundle);

  // Group as language -> problem id -> sequence, demanding a parallel corpus.
  std::map<std::string, std::map<std::string, const SequenceEntry*>> by_lang;
  for (const auto& seq : bundle.sequences) {
    by_lang[seq.language][seq.id] = &seq;
  }
  if (by_lang.size() < 2) {
    throw std::invalid_argument("audit needs at least two languages, got " +
                                std::to_string(by_lang.size()));
  }

  std::vector<std::string> languages;
  for (const auto& [lang, _] : by_lang) languages.push_back(lang);

  std::vector<std::string> ids;
  for (const auto& [id, _] : by_lang.begin()->second) ids.push_back(id);
  for (const auto& [lang, entries] : by_lang) {
    for (const auto& id : ids) {
      if (entries.count(id) == 0) {
        throw std::invalid_argument("language '" + lang +
                                    "' is missing sequence '" + id + "'");
      }
    }
    for (const auto& [id, _] : entries) {
      if (!std::binary_search(ids.begin(), ids.end(), id)) {
        throw std::invalid_argument("sequence '" + id + "' of language '" +
                                    lang +
                                    "' has no counterpart in every language");
      }
    }
  }

  LayerRange range;
  if (cfg.layers.has_value()) {
    range = *cfg.layers;
    if (range.lo < 0 || range.lo > range.hi || range.hi >= bundle.n_layers) {
      throw std::invalid_argument(
          "layer range [" + std::to_string(range.lo) + ", " +
          std::to_string(range.hi) + "] invalid for a bundle with " +
          std::to_string(bundle.n_layers) + " layers");
    }
  } else {
    range = middle_layers(bundle.n_layers);
  }

  AuditReport report;
  report.source = cfg.bundle_dir.string();
  for (Metric m : cfg.metrics) report.metric_names.push_back(metric_name(m));
  report.layers_used = range;
  report.languages = languages;

  MetricOptions metric_options{cfg.cka_center_columns};

  std::vector<std::pair<std::string, std::string>> lang_pairs;
  for (std::size_t i = 0; i < languages.size(); ++i) {
    for (std::size_t j = i + 1; j < languages.size(); ++j) {
      lang_pairs.emplace_back(languages[i], languages[j]);
    }
  }

  report.totals.problems = ids.size();
  report.totals.language_pairs = lang_pairs.size();
  report.totals.raw_pairs_total = ids.size() * lang_pairs.size();
  for (Metric m : cfg.metrics) {
    report.totals.included[metric_name(m)] = 0;
    report.totals.excluded[metric_name(m)] = 0;
  }

  // per problem, per metric: aggregated similarity per language pair
  std::map<std::string, std::map<std::string, std::map<LanguagePair, double>>>
      sims_by_id;
  std::map<std::string, std::vector<double>> cka_by_pair;

  for (const auto& id : ids) {
    for (const auto& [lang_a, lang_b] : lang_pairs) {
      const SequenceEntry& a = *by_lang.at(lang_a).at(id);
      const SequenceEntry& b = *by_lang.at(lang_b).at(id);
      SimilarityRecord rec = make_record(id + ":" + lang_a + "-" + lang_b, a,
                                         b, cfg.shared_fraction_mode);

      AlignedPositions alignment = shared_token_positions(a.tokens, b.tokens);
      const bool passes = filter_min_shared(alignment, cfg.min_shared);

      for (Metric metric : cfg.metrics) {
        const std::string name = metric_name(metric);
        if (metric == Metric::MeanPooledCosine) {
          double value = aggregate_metric(a, b, metric, range, std::nullopt,
                                          metric_options);
          rec.similarity[name] = value;
          ++report.totals.included[name];
        } else {
          if (!passes) {
            ++report.totals.excluded[name];
            continue;
          }
          double value = aggregate_metric(a, b, metric, range, alignment,
                                          metric_options);
          rec.similarity[name] = value;
          ++report.totals.included[name];
          if (metric == Metric::LinearCKA) {
            cka_by_pair[lang_a + "-" + lang_b].push_back(value);
          }
        }
        if (rec.similarity.count(name) != 0) {
          sims_by_id[id][name][language_pair(lang_a, lang_b)] =
              rec.similarity[name];
        }
      }
      report.raw_records.push_back(std::move(rec));
    }
  }

  if (cfg.reference_language.has_value()) {
    const std::string& ref = *cfg.reference_language;
    if (by_lang.count(ref) == 0) {
      throw std::invalid_argument("reference language '" + ref +
                                  "' not present in the bundle");
    }
    report.proximity_mode = true;
    report.reference_language = ref;
    for (Metric m : cfg.metrics) {
      report.totals.dv_included[metric_name(m)] = 0;
      report.totals.dv_excluded[metric_name(m)] = 0;
    }

    for (const auto& id : ids) {
      for (const auto& target : languages) {
        if (target == ref) continue;
        const SequenceEntry& ref_seq = *by_lang.at(ref).at(id);
        const SequenceEntry& tgt_seq = *by_lang.at(target).at(id);
        SimilarityRecord rec = make_record(id + ":" + target, ref_seq, tgt_seq,
                                           cfg.shared_fraction_mode);
        for (Metric metric : cfg.metrics) {
          const std::string name = metric_name(metric);
          // The reference pair is needed for the leading term in either
          // baseline mode, so completeness is every (other, target) pair.
          const auto& sims = sims_by_id[id][name];
          bool complete = true;
          for (const auto& other : languages) {
            if (other == target) continue;
            if (sims.count(language_pair(other, target)) == 0) {
              complete = false;
              break;
            }
          }
          if (!complete) {
            ++report.totals.dv_excluded[name];
            continue;
          }
          ProximityScore score = python_proximity(sims, target, languages,
                                                  metric, ref, cfg.baseline);
          rec.similarity[name] = score.value;
          ++report.totals.dv_included[name];
        }
        report.dv_records.push_back(std::move(rec));
      }
    }
  } else {
    report.dv_records = report.raw_records;
  }

  ConfoundOptions copts{cfg.bootstrap_replicates, cfg.seed, cfg.ci_level,
                        cfg.ci};
  for (Metric metric : cfg.metrics) {
    const std::string name = metric_name(metric);
    try {
      report.regression.push_back(confound_row(report.dv_records, name, copts));
    } catch (const std::domain_error& e) {
      report.regression_errors[name] = e.what();
    } catch (const std::runtime_error& e) {
      report.regression_errors[name] = e.what();
    }
    try {
      report.crossdomain.push_back(
          confound_row(report.raw_records, name, copts));
    } catch (const std::domain_error& e) {
      report.crossdomain_errors[name] = e.what();
    } catch (const std::runtime_error& e) {
      report.crossdomain_errors[name] = e.what();
    }
  }

  for (const auto& [pair_label, values] : cka_by_pair) {
    CkaLevelRow row;
    row.language_pair = pair_label;
    row.n = values.size();
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    row.mean_cka = mean;
    row.std_cka = values.size() > 1
                      ? std::sqrt(ss / static_cast<double>(values.size() - 1))
                      : 0.0;
    report.cka_levels.push_back(row);
  }

  return report;
}

namespace {

const ConfoundRow* find_row(const std::vector<ConfoundRow>& rows,
                            const std::string& metric) {
  for (const auto& row : rows) {
    if (row.metric == metric) return &row;
  }
  return nullptr;
}

std::string beta_for(const ConfoundRow& row, const std::string& predictor) {
  for (std::size_t j = 0; j < row.predictors.size(); ++j) {
    if (row.predictors[j] == predictor) return format_number(row.betas[j]);
  }
  return "";
}

nlohmann::json row_to_json(const ConfoundRow& row) {
  nlohmann::json j;
  j["metric"] = row.metric;
  j["n"] = row.n;
  j["r_univ"] = row.r_univ;
  j["r2_length_only"] = row.r2_length_only;
  j["ci"] = {{"lo", row.length_ci.lo},
             {"hi", row.length_ci.hi},
             {"method", ci_method_name(row.length_ci.method)}};
  j["r2_full"] = row.r2_full;
  j["predictors"] = row.predictors;
  j["betas"] = row.betas;
  j["p_proxies"] = row.p_proxies;
  j["r2_delta_vs_length"] = row.r2_delta_vs_length;
  return j;
}

}  // namespace

void emit_report(const AuditReport& report, const AuditConfig& cfg,
                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create report directory '" +
                             dir.string() + "'");
  }

  const std::vector<std::string>& metric_names = report.metric_names;

  // Table 1 shape: length-only R^2 with CI, full-model R^2 and betas.
  {
    CsvTable t;
    t.header = {"metric",   "n",        "r2_length_only", "ci_lo",
                "ci_hi",    "ci_method", "r2_full",       "beta_len",
                "beta_depth", "beta_shared"};
    for (const auto& name : metric_names) {
      const ConfoundRow* row = find_row(report.regression, name);
      if (row == nullptr) continue;
      t.rows.push_back({name, std::to_string(row->n),
                        format_number(row->r2_length_only),
                        format_number(row->length_ci.lo),
                        format_number(row->length_ci.hi),
                        ci_method_name(row->length_ci.method),
                        format_number(row->r2_full),
                        beta_for(*row, "length_ratio"),
                        beta_for(*row, "depth_range"),
                        beta_for(*row, "shared_fraction")});
    }
    write_csv(dir / "table_regression.csv", t);
  }

  // Table 2 shape: metric comparison with the univariate correlation.
  {
    CsvTable t;
    t.header = {"metric", "r2_full", "beta_len", "beta_depth", "r_univ"};
    for (const auto& name : metric_names) {
      const ConfoundRow* row = find_row(report.regression, name);
      if (row == nullptr) continue;
      t.rows.push_back({name, format_number(row->r2_full),
                        beta_for(*row, "length_ratio"),
                        beta_for(*row, "depth_range"),
                        format_number(row->r_univ)});
    }
    write_csv(dir / "table_metrics.csv", t);
  }

  // Table 4 shape: length-only R^2 of the raw similarity with CI.
  {
    CsvTable t;
    t.header = {"metric", "r2", "ci_lo", "ci_hi", "ci_method", "n"};
    for (const auto& name : metric_names) {
      const ConfoundRow* row = find_row(report.crossdomain, name);
      if (row == nullptr) continue;
      t.rows.push_back({name, format_number(row->r2_length_only),
                        format_number(row->length_ci.lo),
                        format_number(row->length_ci.hi),
                        ci_method_name(row->length_ci.method),
                        std::to_string(row->n)});
    }
    write_csv(dir / "table_crossdomain.csv", t);
  }

  // Table 5 shape: raw mean CKA with across-pair std.
  {
    CsvTable t;
    t.header = {"language_pair", "mean_cka", "std_cka", "n"};
    for (const auto& row : report.cka_levels) {
      t.rows.push_back({row.language_pair, format_number(row.mean_cka),
                        format_number(row.std_cka), std::to_string(row.n)});
    }
    write_csv(dir / "table_cka_levels.csv", t);
  }

  // Scatter data: similarity vs each covariate, per metric.
  std::vector<const SimilarityRecord*> sorted_records;
  for (const auto& rec : report.dv_records) sorted_records.push_back(&rec);
  std::stable_sort(sorted_records.begin(), sorted_records.end(),
                   [](const SimilarityRecord* a, const SimilarityRecord* b) {
                     return a->pair_id < b->pair_id;
                   });
  for (const auto& name : metric_names) {
    struct Covariate {
      const char* label;
      bool is_depth;
    };
    for (const auto& cov : {Covariate{"length_ratio", false},
                            Covariate{"depth_range", true},
                            Covariate{"shared_fraction", false}}) {
      CsvTable t;
      t.header = {"pair_id", cov.label, "similarity"};
      bool covariate_available = true;
      for (const auto* rec : sorted_records) {
        if (rec->similarity.count(name) == 0) continue;
        double cov_value = 0.0;
        if (cov.is_depth) {
          if (!rec->depth_range.has_value()) {
            covariate_available = false;
            break;
          }
          cov_value = *rec->depth_range;
        } else if (std::string(cov.label) == "length_ratio") {
          cov_value = rec->length_ratio;
        } else {
          cov_value = rec->shared_fraction;
        }
        t.rows.push_back({rec->pair_id, format_number(cov_value),
                          format_number(rec->similarity.at(name))});
      }
      if (!covariate_available) continue;
      write_csv(dir / ("fig_" + name + "_" + cov.label + ".csv"), t);
    }
  }

  // JSON roll-up with the full detail.
  nlohmann::json j;
  j["config"] = {
      {"source", report.source},
      {"metrics", metric_names},
      {"reference_language",
       cfg.reference_language.value_or(std::string{})},
      {"min_shared", cfg.min_shared},
      {"bootstrap_replicates", cfg.bootstrap_replicates},
      {"seed", cfg.seed},
      {"ci", ci_method_name(cfg.ci)},
      {"ci_level", cfg.ci_level},
      {"cka_center_columns", cfg.cka_center_columns},
      {"proximity_baseline",
       cfg.baseline == ProximityBaseline::IncludeReference ? "literal"
                                                           : "exclude-ref"},
      {"shared_fraction_mode",
       cfg.shared_fraction_mode == SharedFractionMode::TypeJaccard
           ? "type-jaccard"
           : "token-overlap"},
  };
  j["layers"] = {{"lo", report.layers_used.lo}, {"hi", report.layers_used.hi}};
  j["languages"] = report.languages;
  j["proximity_mode"] = report.proximity_mode;
  if (report.proximity_mode) {
    j["reference_language"] = report.reference_language;
  }
  j["totals"] = {{"problems", report.totals.problems},
                 {"language_pairs", report.totals.language_pairs},
                 {"raw_pairs_total", report.totals.raw_pairs_total},
                 {"included", report.totals.included},
                 {"excluded", report.totals.excluded},
                 {"dv_included", report.totals.dv_included},
                 {"dv_excluded", report.totals.dv_excluded}};
  j["regression"] = nlohmann::json::array();
  for (const auto& row : report.regression) {
    j["regression"].push_back(row_to_json(row));
  }
  j["crossdomain"] = nlohmann::json::array();
  for (const auto& row : report.crossdomain) {
    j["crossdomain"].push_back(row_to_json(row));
  }
  j["regression_errors"] = report.regression_errors;
  j["crossdomain_errors"] = report.crossdomain_errors;
  j["cka_levels"] = nlohmann::json::array();
  for (const auto& row : report.cka_levels) {
    j["cka_levels"].push_back({{"language_pair", row.language_pair},
                               {"mean_cka", row.mean_cka},
                               {"std_cka", row.std_cka},
                               {"n", row.n}});
  }

  std::ofstream out(dir / "audit.json", std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write audit.json in '" + dir.string() +
                             "'");
  }
  out << j.dump(2) << "\n";
}

}  // namespace lvar
