#include "lvar/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace lvar {

namespace {

// X X' with optional double-centering, i.e. the Gram matrix of the
// column-centered rows. `pre_norm` receives the Frobenius norm before
// centering so callers can detect numerically-zero centered matrices.
Eigen::MatrixXd gram(const Eigen::MatrixXd& m, bool center, double* pre_norm) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m.rows(), m.rows());
  g.selfadjointView<Eigen::Lower>().rankUpdate(m);
  g.template triangularView<Eigen::StrictlyUpper>() =
      g.transpose().template triangularView<Eigen::StrictlyUpper>();
  if (pre_norm != nullptr) *pre_norm = g.norm();
  if (center) {
    Eigen::VectorXd row_mean = g.rowwise().mean();
    double grand_mean = row_mean.mean();
    g.colwise() -= row_mean;
    g.rowwise() -= row_mean.transpose();
    g.array() += grand_mean;
  }
  return g;
}

double clamp_unit_interval(double value, const char* what) {
  constexpr double slack = 1e-9;
  if (value < 0.0) {
    if (value < -slack) {
      throw std::runtime_error(std::string(what) + " out of range: " +
                               std::to_string(value));
    }
    return 0.0;
  }
  if (value > 1.0) {
    if (value > 1.0 + slack) {
      throw std::runtime_error(std::string(what) + " out of range: " +
                               std::to_string(value));
    }
    return 1.0;
  }
  return value;
}

// Shared evaluation for linear CKA and the RV coefficient; both normalize
// the Frobenius inner product of the (optionally centered) Gram matrices.
double gram_similarity(const TokenMatrix& x, const TokenMatrix& y, bool center,
                       const char* what) {
  validate(x);
  validate(y);
  if (x.length() != y.length()) {
    throw std::invalid_argument(
        std::string(what) + " requires equal row counts, got T=" +
        std::to_string(x.length()) + " vs T=" + std::to_string(y.length()) +
        "; align positions first");
  }
  if (x.length() < 2) {
    throw std::invalid_argument(std::string(what) + " requires T >= 2, got " +
                                std::to_string(x.length()));
  }
  double pre_x = 0.0;
  double pre_y = 0.0;
  Eigen::MatrixXd gx = gram(x.values, center, &pre_x);
  Eigen::MatrixXd gy = gram(y.values, center, &pre_y);
  const double norm_x = gx.norm();
  const double norm_y = gy.norm();
  // A centered matrix that is zero to rounding error (constant rows, or an
  // all-zero input) leaves the normalizer undefined.
  constexpr double degenerate = 1e-12;
  if (norm_x <= degenerate * pre_x || norm_x == 0.0) {
    throw std::domain_error(std::string(what) +
                            ": centered first argument is numerically zero, "
                            "normalizer undefined");
  }
  if (norm_y <= degenerate * pre_y || norm_y == 0.0) {
    throw std::domain_error(std::string(what) +
                            ": centered second argument is numerically zero, "
                            "normalizer undefined");
  }
  double numerator = (gx.array() * gy.array()).sum();
  return clamp_unit_interval(numerator / (norm_x * norm_y), what);
}

}  // namespace

std::string metric_name(Metric m) {
  switch (m) {
    case Metric::MeanPooledCosine: return "cosine";
    case Metric::LinearCKA: return "cka";
    case Metric::RV: return "rv";
  }
  return "unknown";
}

std::optional<Metric> parse_metric(const std::string& name) {
  if (name == "cosine") return Metric::MeanPooledCosine;
  if (name == "cka") return Metric::LinearCKA;
  if (name == "rv") return Metric::RV;
  return std::nullopt;
}

double cosine(const PooledVector& a, const PooledVector& b) {
  if (a.values.size() != b.values.size()) {
    throw std::invalid_argument("cosine requires equal dimensions, got " +
                                std::to_string(a.values.size()) + " vs " +
                                std::to_string(b.values.size()));
  }
  const double norm_a = a.values.norm();
  const double norm_b = b.values.norm();
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw std::domain_error("cosine of a zero-norm vector is undefined");
  }
  double value = a.values.dot(b.values) / (norm_a * norm_b);
  return std::clamp(value, -1.0, 1.0);
}

double linear_cka(const TokenMatrix& x, const TokenMatrix& y,
                  bool center_columns) {
  return gram_similarity(x, y, center_columns, "linear CKA");
}

double rv_coefficient(const TokenMatrix& x, const TokenMatrix& y) {
  return gram_similarity(x, y, /*center=*/true, "RV coefficient");
}

SimilarityValue pairwise_similarity(
    const TokenMatrix& x, const TokenMatrix& y, Metric metric,
    const std::optional<AlignedPositions>& alignment,
    const MetricOptions& options) {
  if (metric == Metric::MeanPooledCosine) {
    double value = cosine(mean_pool(x), mean_pool(y));
    return SimilarityValue{metric, value, x.layer_index};
  }

  const TokenMatrix* mx = &x;
  const TokenMatrix* my = &y;
  TokenMatrix sub_x;
  TokenMatrix sub_y;
  if (alignment.has_value()) {
    validate(*alignment, x.length(), y.length());
    if (alignment->size() < 2) {
      throw std::invalid_argument(
          "matrix metrics require an alignment with >= 2 positions, got " +
          std::to_string(alignment->size()));
    }
    sub_x.values = x.values(alignment->idx_a, Eigen::all);
    sub_y.values = y.values(alignment->idx_b, Eigen::all);
    sub_x.layer_index = x.layer_index;
    sub_y.layer_index = y.layer_index;
    mx = &sub_x;
    my = &sub_y;
  } else if (x.length() != y.length()) {
    throw std::invalid_argument(
        "matrix metric on unequal-length inputs (T=" +
        std::to_string(x.length()) + " vs T=" + std::to_string(y.length()) +
        ") requires an explicit alignment");
  }

  double value = metric == Metric::LinearCKA
                     ? linear_cka(*mx, *my, options.cka_center_columns)
                     : rv_coefficient(*mx, *my);
  return SimilarityValue{metric, value, x.layer_index};
}

LanguagePair language_pair(const std::string& a, const std::string& b) {
  return a <= b ? LanguagePair{a, b} : LanguagePair{b, a};
}

ProximityScore python_proximity(const std::map<LanguagePair, double>& sims,
                                const std::string& target,
                                const std::vector<std::string>& languages,
                                Metric metric, const std::string& reference,
                                ProximityBaseline baseline) {
  if (std::find(languages.begin(), languages.end(), reference) ==
      languages.end()) {
    throw std::invalid_argument("reference language '" + reference +
                                "' not in language set");
  }
  if (std::find(languages.begin(), languages.end(), target) ==
      languages.end()) {
    throw std::invalid_argument("target language '" + target +
                                "' not in language set");
  }
  if (target == reference) {
    throw std::invalid_argument("target must differ from the reference language");
  }

  auto lookup = [&sims](const std::string& a, const std::string& b) {
    auto it = sims.find(language_pair(a, b));
    if (it == sims.end()) {
      throw std::invalid_argument("missing similarity for pair (" + a + ", " +
                                  b + ")");
    }
    return it->second;
  };

  double baseline_sum = 0.0;
  std::size_t baseline_count = 0;
  for (const auto& other : languages) {
    if (other == target) continue;
    if (baseline == ProximityBaseline::ExcludeReference && other == reference)
      continue;
    baseline_sum += lookup(other, target);
    ++baseline_count;
  }
  if (baseline_count == 0) {
    throw std::invalid_argument("language set too small for the proximity baseline");
  }
  double value = lookup(reference, target) -
                 baseline_sum / static_cast<double>(baseline_count);
  return ProximityScore{target, value, metric};
}

double aggregate_over_layers(const std::vector<SimilarityValue>& values,
                             const LayerRange& range) {
  if (range.lo > range.hi) {
    throw std::invalid_argument("layer range lo " + std::to_string(range.lo) +
                                " exceeds hi " + std::to_string(range.hi));
  }
  std::map<int, double> by_layer;
  for (const auto& v : values) {
    if (v.layer_index < range.lo || v.layer_index > range.hi) continue;
    if (!by_layer.emplace(v.layer_index, v.value).second) {
      throw std::invalid_argument("duplicate similarity for layer " +
                                  std::to_string(v.layer_index));
    }
  }
  double sum = 0.0;
  for (int layer = range.lo; layer <= range.hi; ++layer) {
    auto it = by_layer.find(layer);
    if (it == by_layer.end()) {
      throw std::invalid_argument("missing similarity for layer " +
                                  std::to_string(layer));
    }
    sum += it->second;
  }
  return sum / static_cast<double>(range.hi - range.lo + 1);
}

}  // namespace lvar
