#pragma once

#include <cstdint>
#include <vector>

#include "lvar/core.hpp"
#include "lvar/rng.hpp"
#include "lvar/theory.hpp"

namespace lvar {

// Configuration for the anisotropic random-sequence experiment: n_pairs
// draws of r ~ Uniform(ratio_lo, ratio_hi), each producing two independent
// sequences of lengths base_length and floor(base_length / r).
struct SyntheticConfig {
  AnisotropyParams params;
  int n_pairs = 200;
  std::int64_t base_length = 100;
  double ratio_lo = 0.3;
  double ratio_hi = 1.0;
  std::uint64_t seed = 0;
  bool random_direction = false;  // draw a seeded unit mu instead of axis 0
  int threads = 0;                // 0 picks hardware concurrency
};

void validate(const SyntheticConfig& cfg);

struct SyntheticRecord {
  int pair_index = 0;
  double ratio = 0.0;  // the drawn r
  std::int64_t len_a = 0;
  std::int64_t len_b = 0;
  double cosine = 0.0;
  double cka = 0.0;  // NaN when the centered normalizer is degenerate (sigma = 0)
};

// Rows are mu + sigma * eps with eps standard normal per coordinate, filled
// in row-major draw order from `rng`. mu points along the first coordinate
// axis scaled to mu_norm unless a unit `direction` is supplied. sigma = 0
// consumes no draws. Tokens are left empty.
TokenMatrix generate_sequence(const AnisotropyParams& p, std::int64_t length,
                              CounterRng& rng,
                              const Eigen::VectorXd* direction = nullptr);

// Unit-norm random direction (normalized Gaussian vector).
Eigen::VectorXd random_unit_direction(int dim, CounterRng& rng);

// Runs the experiment. Pair i consumes only the substream (seed, i), so
// records are bit-identical for any thread count and ordered by pair index.
// CKA is computed on the first min(len_a, len_b) rows of each sequence.
std::vector<SyntheticRecord> run_synthetic_experiment(const SyntheticConfig& cfg);

struct TheoryComparison {
  double mean_signed_deviation = 0.0;
  double max_abs_deviation = 0.0;
  std::vector<double> deviations;  // per record: cosine - predicted
};

// Per-record deviation of the empirical cosine from the closed-form
// prediction. Rejects records whose lengths are inconsistent with
// (base_length, ratio).
TheoryComparison compare_to_theory(const std::vector<SyntheticRecord>& records,
                                   const AnisotropyParams& p,
                                   std::int64_t base_length);

}  // namespace lvar
