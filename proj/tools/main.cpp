#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "lvar/audit.hpp"
#include "lvar/bundle.hpp"
#include "lvar/csv.hpp"
#include "lvar/metrics.hpp"
#include "lvar/stats.hpp"
#include "lvar/synthetic.hpp"
#include "lvar/theory.hpp"

namespace {

void write_table(const lvar::CsvTable& table, const std::string& out_path) {
  if (out_path.empty()) {
    lvar::write_csv(std::cout, table);
  } else {
    lvar::write_csv(std::filesystem::path(out_path), table);
  }
}

std::vector<lvar::Metric> parse_metric_list(const std::vector<std::string>& names) {
  std::vector<lvar::Metric> metrics;
  for (const auto& name : names) {
    auto metric = lvar::parse_metric(name);
    if (!metric.has_value()) {
      throw std::runtime_error("unknown metric '" + name +
                               "' (expected cosine, cka or rv)");
    }
    metrics.push_back(*metric);
  }
  return metrics;
}

lvar::LayerRange parse_layer_range(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw std::runtime_error("layer range must look like lo:hi, got '" + text +
                             "'");
  }
  return lvar::LayerRange{std::stoi(text.substr(0, colon)),
                          std::stoi(text.substr(colon + 1))};
}

struct TheoryArgs {
  std::vector<double> rhos;
  std::vector<std::int64_t> ms;
  std::vector<std::int64_t> ns;
  std::string out;
};

void run_theory(const TheoryArgs& args) {
  lvar::CsvTable table;
  table.header = {"rho", "m", "n", "expected_cosine", "taylor_cosine",
                  "artifact_signal"};
  for (double rho : args.rhos) {
    if (rho < 0.0) {
      throw std::runtime_error("rho must be >= 0, got " + std::to_string(rho));
    }
    for (std::int64_t m : args.ms) {
      for (std::int64_t n : args.ns) {
        lvar::LengthPair len{m, n};
        lvar::validate(len);
        table.rows.push_back(
            {lvar::format_number(rho), std::to_string(m), std::to_string(n),
             lvar::format_number(lvar::expected_cosine_rho(
                 rho, static_cast<double>(m), static_cast<double>(n))),
             lvar::format_number(lvar::taylor_cosine_rho(
                 rho, static_cast<double>(m), static_cast<double>(n))),
             lvar::format_number(lvar::artifact_signal(len))});
      }
    }
  }
  write_table(table, args.out);
}

struct SyntheticArgs {
  lvar::SyntheticConfig cfg;
  std::string out;
};

void run_synthetic(const SyntheticArgs& args) {
  auto records = lvar::run_synthetic_experiment(args.cfg);
  lvar::CsvTable table;
  table.header = {"pair_index", "ratio",         "len_a", "len_b",
                  "cosine",     "cka",           "predicted_cosine",
                  "deviation"};
  for (const auto& rec : records) {
    double predicted = lvar::expected_cosine(args.cfg.params,
                                             lvar::LengthPair{rec.len_a, rec.len_b});
    table.rows.push_back({std::to_string(rec.pair_index),
                          lvar::format_number(rec.ratio),
                          std::to_string(rec.len_a), std::to_string(rec.len_b),
                          lvar::format_number(rec.cosine),
                          lvar::format_number(rec.cka),
                          lvar::format_number(predicted),
                          lvar::format_number(rec.cosine - predicted)});
  }
  write_table(table, args.out);
}

void run_ingest_validate(const std::string& bundle_dir) {
  lvar::ActivationBundle bundle =
      lvar::read_bundle(std::filesystem::path(bundle_dir));
  std::size_t with_depth = 0;
  std::set<std::string> languages;
  for (const auto& seq : bundle.sequences) {
    languages.insert(seq.language);
    if (seq.depth.has_value()) ++with_depth;
    std::cout << "sequence id=" << seq.id << " language=" << seq.language
              << " T=" << seq.length() << " d=" << bundle.dim
              << " layers=" << bundle.n_layers
              << " tokens=" << seq.tokens.size() << " depth="
              << (seq.depth.has_value() ? lvar::format_number(*seq.depth)
                                        : std::string("-"))
              << "\n";
  }
  std::cout << "sequences=" << bundle.sequences.size()
            << " languages=" << languages.size()
            << " layers=" << bundle.n_layers << " dim=" << bundle.dim << "\n";
  std::cout << "covariates: depth " << with_depth << "/"
            << bundle.sequences.size() << "\n";
  std::cout << "ok\n";
}

struct AuditArgs {
  std::string bundle;
  std::string out;
  std::vector<std::string> metrics{"cosine", "cka"};
  std::string reference;
  std::string layers;
  std::size_t min_shared = 3;
  int bootstrap_b = 1000;
  std::uint64_t seed = 0;
  std::string ci = "bootstrap";
  double level = 0.95;
  bool cka_uncentered = false;
  std::string baseline = "literal";
  std::string shared_fraction = "type-jaccard";
};

lvar::AuditConfig to_config(const AuditArgs& args) {
  lvar::AuditConfig cfg;
  cfg.bundle_dir = args.bundle;
  cfg.metrics = parse_metric_list(args.metrics);
  if (!args.layers.empty()) cfg.layers = parse_layer_range(args.layers);
  if (!args.reference.empty()) cfg.reference_language = args.reference;
  cfg.min_shared = args.min_shared;
  cfg.bootstrap_replicates = args.bootstrap_b;
  cfg.seed = args.seed;
  if (args.ci == "bootstrap") {
    cfg.ci = lvar::CiMethod::Bootstrap;
  } else if (args.ci == "fisher") {
    cfg.ci = lvar::CiMethod::Fisher;
  } else {
    throw std::runtime_error("--ci must be bootstrap or fisher");
  }
  cfg.ci_level = args.level;
  cfg.cka_center_columns = !args.cka_uncentered;
  if (args.baseline == "literal") {
    cfg.baseline = lvar::ProximityBaseline::IncludeReference;
  } else if (args.baseline == "exclude-ref") {
    cfg.baseline = lvar::ProximityBaseline::ExcludeReference;
  } else {
    throw std::runtime_error("--proximity-baseline must be literal or exclude-ref");
  }
  if (args.shared_fraction == "type-jaccard") {
    cfg.shared_fraction_mode = lvar::SharedFractionMode::TypeJaccard;
  } else if (args.shared_fraction == "token-overlap") {
    cfg.shared_fraction_mode = lvar::SharedFractionMode::TokenOverlap;
  } else {
    throw std::runtime_error("--shared-fraction must be type-jaccard or token-overlap");
  }
  return cfg;
}

void run_audit_cmd(const AuditArgs& args) {
  lvar::AuditConfig cfg = to_config(args);
  lvar::AuditReport report = lvar::run_audit(cfg);
  lvar::emit_report(report, cfg, args.out);
  std::cout << "audit: " << report.totals.problems << " problems, "
            << report.totals.language_pairs << " language pairs, layers ["
            << report.layers_used.lo << ", " << report.layers_used.hi << "]\n";
  for (const auto& [metric, count] : report.totals.excluded) {
    std::cout << "  " << metric << ": included "
              << report.totals.included.at(metric) << ", excluded " << count
              << "\n";
  }
  for (const auto& [metric, why] : report.regression_errors) {
    std::cout << "  " << metric << ": regression skipped (" << why << ")\n";
  }
  std::cout << "report written to " << args.out << "\n";
}

struct RegressArgs {
  std::string input;
  std::string out;
  std::vector<std::string> metrics;
  int bootstrap_b = 1000;
  std::uint64_t seed = 0;
  std::string ci = "bootstrap";
  double level = 0.95;
};

void run_regress(const RegressArgs& args) {
  lvar::CsvTable csv = lvar::read_csv(args.input);
  std::vector<std::string> metrics = args.metrics;
  auto records = lvar::records_from_csv(csv, metrics);

  lvar::ConfoundOptions opts;
  opts.bootstrap_replicates = args.bootstrap_b;
  opts.seed = args.seed;
  opts.level = args.level;
  if (args.ci == "bootstrap") {
    opts.ci = lvar::CiMethod::Bootstrap;
  } else if (args.ci == "fisher") {
    opts.ci = lvar::CiMethod::Fisher;
  } else {
    throw std::runtime_error("--ci must be bootstrap or fisher");
  }

  lvar::AuditReport report;
  report.source = args.input;
  report.metric_names = metrics;
  report.dv_records = records;
  report.raw_records = std::move(records);
  for (const auto& metric : metrics) {
    try {
      report.regression.push_back(
          lvar::confound_row(report.dv_records, metric, opts));
    } catch (const std::exception& e) {
      report.regression_errors[metric] = e.what();
      continue;
    }
    report.crossdomain.push_back(report.regression.back());
  }
  // Raw CKA level summary over all records when a cka column is present.
  if (std::find(metrics.begin(), metrics.end(), "cka") != metrics.end()) {
    std::vector<double> values;
    for (const auto& rec : report.raw_records) {
      auto it = rec.similarity.find("cka");
      if (it != rec.similarity.end()) values.push_back(it->second);
    }
    if (!values.empty()) {
      double mean = 0.0;
      for (double v : values) mean += v;
      mean /= static_cast<double>(values.size());
      double ss = 0.0;
      for (double v : values) ss += (v - mean) * (v - mean);
      lvar::CkaLevelRow row;
      row.language_pair = "all";
      row.mean_cka = mean;
      row.std_cka = values.size() > 1
                        ? std::sqrt(ss / static_cast<double>(values.size() - 1))
                        : 0.0;
      row.n = values.size();
      report.cka_levels.push_back(row);
    }
  }

  lvar::AuditConfig cfg;  // scalar echo for the JSON roll-up
  cfg.bundle_dir = args.input;
  cfg.bootstrap_replicates = args.bootstrap_b;
  cfg.seed = args.seed;
  cfg.ci = opts.ci;
  cfg.ci_level = args.level;
  lvar::emit_report(report, cfg, args.out);
  std::cout << "regress: " << report.dv_records.size() << " records, "
            << report.regression.size() << " metric rows\n";
  for (const auto& [metric, why] : report.regression_errors) {
    std::cout << "  " << metric << ": skipped (" << why << ")\n";
  }
  std::cout << "report written to " << args.out << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"length-artifact audit for token-level representation similarity"};
  app.require_subcommand(1);

  TheoryArgs theory_args;
  auto* theory_cmd = app.add_subcommand(
      "theory", "closed-form expected cosine over a (rho, m, n) grid");
  theory_cmd->add_option("--rho", theory_args.rhos, "anisotropy ratios")
      ->required()
      ->delimiter(',');
  theory_cmd->add_option("--m", theory_args.ms, "first sequence lengths")
      ->required()
      ->delimiter(',');
  theory_cmd->add_option("--n", theory_args.ns, "second sequence lengths")
      ->required()
      ->delimiter(',');
  theory_cmd->add_option("--out", theory_args.out, "output CSV (default stdout)");
  theory_cmd->callback([&theory_args]() { run_theory(theory_args); });

  SyntheticArgs synth_args;
  synth_args.cfg.params = lvar::AnisotropyParams{10.0, 1.0, 4096};
  auto* synth_cmd = app.add_subcommand(
      "synthetic", "anisotropic random-sequence experiment (cosine vs CKA)");
  synth_cmd->add_option("--dim", synth_args.cfg.params.dim, "hidden dimension")
      ->capture_default_str();
  synth_cmd
      ->add_option("--mu-norm", synth_args.cfg.params.mu_norm,
                   "norm of the shared direction")
      ->capture_default_str();
  synth_cmd->add_option("--sigma", synth_args.cfg.params.sigma, "noise scale")
      ->capture_default_str();
  synth_cmd->add_option("--pairs", synth_args.cfg.n_pairs, "number of pairs")
      ->capture_default_str();
  synth_cmd
      ->add_option("--base-length", synth_args.cfg.base_length,
                   "length of the first sequence")
      ->capture_default_str();
  synth_cmd->add_option("--ratio-lo", synth_args.cfg.ratio_lo, "ratio lower bound")
      ->capture_default_str();
  synth_cmd->add_option("--ratio-hi", synth_args.cfg.ratio_hi, "ratio upper bound")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.cfg.seed, "random seed")
      ->capture_default_str();
  synth_cmd->add_option("--threads", synth_args.cfg.threads,
                        "worker threads (0 = hardware)");
  synth_cmd->add_flag("--random-direction", synth_args.cfg.random_direction,
                      "use a seeded random unit mu instead of axis 0");
  synth_cmd->add_option("--out", synth_args.out, "output CSV (default stdout)");
  synth_cmd->callback([&synth_args]() { run_synthetic(synth_args); });

  auto* ingest_cmd = app.add_subcommand("ingest", "activation bundle utilities");
  std::string bundle_dir;
  auto* validate_cmd = ingest_cmd->add_subcommand(
      "validate", "check a bundle and print per-sequence shapes");
  validate_cmd->add_option("bundle", bundle_dir, "bundle directory")->required();
  validate_cmd->callback([&bundle_dir]() { run_ingest_validate(bundle_dir); });
  ingest_cmd->require_subcommand(1);

  AuditArgs audit_args;
  auto* audit_cmd = app.add_subcommand(
      "audit", "end-to-end audit: bundle -> similarities -> confound tables");
  audit_cmd->add_option("--bundle", audit_args.bundle, "bundle directory")
      ->required();
  audit_cmd->add_option("--out", audit_args.out, "report directory")->required();
  audit_cmd
      ->add_option("--metrics", audit_args.metrics,
                   "metrics to compute (cosine, cka, rv)")
      ->delimiter(',')
      ->capture_default_str();
  audit_cmd->add_option("--reference", audit_args.reference,
                        "reference language for the proximity DV");
  audit_cmd->add_option("--layers", audit_args.layers,
                        "explicit layer range lo:hi (default: middle layers)");
  audit_cmd
      ->add_option("--min-shared", audit_args.min_shared,
                   "minimum shared tokens for matrix metrics")
      ->capture_default_str();
  audit_cmd
      ->add_option("--bootstrap-b", audit_args.bootstrap_b,
                   "bootstrap replicates")
      ->capture_default_str();
  audit_cmd->add_option("--seed", audit_args.seed, "bootstrap seed")
      ->capture_default_str();
  audit_cmd->add_option("--ci", audit_args.ci, "CI method: bootstrap or fisher")
      ->capture_default_str();
  audit_cmd->add_option("--level", audit_args.level, "confidence level")
      ->capture_default_str();
  audit_cmd->add_flag("--cka-uncentered", audit_args.cka_uncentered,
                      "ablation: skip column centering in CKA");
  audit_cmd
      ->add_option("--proximity-baseline", audit_args.baseline,
                   "literal or exclude-ref")
      ->capture_default_str();
  audit_cmd
      ->add_option("--shared-fraction", audit_args.shared_fraction,
                   "type-jaccard or token-overlap")
      ->capture_default_str();
  audit_cmd->callback([&audit_args]() { run_audit_cmd(audit_args); });

  RegressArgs regress_args;
  auto* regress_cmd = app.add_subcommand(
      "regress", "confound regression on a similarity-record CSV");
  regress_cmd->add_option("--input", regress_args.input, "records CSV")
      ->required();
  regress_cmd->add_option("--out", regress_args.out, "report directory")
      ->required();
  regress_cmd
      ->add_option("--metrics", regress_args.metrics,
                   "metric columns (default: every non-reserved column)")
      ->delimiter(',');
  regress_cmd
      ->add_option("--bootstrap-b", regress_args.bootstrap_b,
                   "bootstrap replicates")
      ->capture_default_str();
  regress_cmd->add_option("--seed", regress_args.seed, "bootstrap seed")
      ->capture_default_str();
  regress_cmd->add_option("--ci", regress_args.ci, "CI method: bootstrap or fisher")
      ->capture_default_str();
  regress_cmd->add_option("--level", regress_args.level, "confidence level")
      ->capture_default_str();
  regress_cmd->callback([&regress_args]() { run_regress(regress_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
