#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lvar/align.hpp"
#include "lvar/core.hpp"

namespace lvar {

enum class Metric { MeanPooledCosine, LinearCKA, RV };

std::string metric_name(Metric m);
std::optional<Metric> parse_metric(const std::string& name);

struct SimilarityValue {
  Metric metric = Metric::MeanPooledCosine;
  double value = 0.0;
  int layer_index = 0;
};

struct ProximityScore {
  std::string target_language;
  double value = 0.0;
  Metric metric = Metric::MeanPooledCosine;
};

// Cosine of two pooled vectors. Rejects zero-norm inputs rather than
// silently returning 0.
double cosine(const PooledVector& a, const PooledVector& b);

// Linear CKA of two token-level matrices with equal row counts (T >= 2):
//
//   ||Yc' Xc||_F^2 / ( ||Xc' Xc||_F * ||Yc' Yc||_F )
//
// with Xc, Yc column-centered. Computed through the T x T centered Gram
// matrices, which is algebraically identical and avoids d x d products.
// There is no pooling step, so the metric does not inherit the 1/sqrt(T)
// concentration that length-biases mean-pooled cosine. `center_columns`
// exists for ablation only; the centered form is the metric.
double linear_cka(const TokenMatrix& x, const TokenMatrix& y,
                  bool center_columns = true);

// RV coefficient: tr(Sxy Syx) / sqrt(tr(Sxx^2) tr(Syy^2)) over the
// cross-/auto-scatter matrices of column-centered inputs. On centered data
// this coincides analytically with linear CKA; it shares the Gram-side
// evaluation and is verified against an independent scatter-trace oracle.
double rv_coefficient(const TokenMatrix& x, const TokenMatrix& y);

struct MetricOptions {
  bool cka_center_columns = true;
};

// Dispatches to the requested metric. MeanPooledCosine pools full matrices
// and ignores the alignment; matrix metrics require an alignment (>= 2
// positions) whenever the row counts differ.
SimilarityValue pairwise_similarity(
    const TokenMatrix& x, const TokenMatrix& y, Metric metric,
    const std::optional<AlignedPositions>& alignment = std::nullopt,
    const MetricOptions& options = {});

// Key for an unordered language pair: lexicographically sorted.
using LanguagePair = std::pair<std::string, std::string>;
LanguagePair language_pair(const std::string& a, const std::string& b);

enum class ProximityBaseline {
  IncludeReference,  // literal formula: baseline mean over all L' != L
  ExcludeReference,  // sensitivity variant: drop the reference language
};

// Proximity of `target` to `reference` relative to the cross-language
// baseline:
//
//   sim(reference, target) - (1/(|S|-1)) * sum_{L' != target} sim(L', target)
//
// In the literal form the baseline sum includes the reference language.
ProximityScore python_proximity(
    const std::map<LanguagePair, double>& sims, const std::string& target,
    const std::vector<std::string>& languages, Metric metric,
    const std::string& reference = "python",
    ProximityBaseline baseline = ProximityBaseline::IncludeReference);

// Arithmetic mean of per-layer values over the inclusive range. Every layer
// in the range must be present exactly once.
double aggregate_over_layers(const std::vector<SimilarityValue>& values,
                             const LayerRange& range);

}  // namespace lvar
