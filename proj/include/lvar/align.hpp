#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace lvar {

// Paired row positions into two token matrices. idx_a is strictly
// increasing; idx_b holds the matched position for each idx_a entry and may
// contain cross-type inversions (duplicates never occur in either list).
struct AlignedPositions {
  std::vector<Eigen::Index> idx_a;
  std::vector<Eigen::Index> idx_b;

  std::size_t size() const { return idx_a.size(); }
  bool empty() const { return idx_a.empty(); }
};

void validate(const AlignedPositions& p, Eigen::Index len_a,
              Eigen::Index len_b);

// Pairs the k-th occurrence of each shared surface form in a with its k-th
// occurrence in b, up to the smaller occurrence count. Output is sorted by
// position in a. Empty output is valid (disjoint vocabularies).
AlignedPositions shared_token_positions(const std::vector<std::string>& tokens_a,
                                        const std::vector<std::string>& tokens_b);

// True iff at least k positions aligned (the corpus filter uses k = 3).
bool filter_min_shared(const AlignedPositions& p, std::size_t k = 3);

enum class SharedFractionMode {
  TypeJaccard,   // |types(a) n types(b)| / |types(a) u types(b)|
  TokenOverlap,  // 2 * sum_t min(count_a(t), count_b(t)) / (|a| + |b|)
};

double shared_token_fraction(const std::vector<std::string>& tokens_a,
                             const std::vector<std::string>& tokens_b,
                             SharedFractionMode mode = SharedFractionMode::TypeJaccard);

// min/max of the two token counts, in (0, 1].
double length_ratio(std::size_t len_a, std::size_t len_b);
double length_ratio(const std::vector<std::string>& tokens_a,
                    const std::vector<std::string>& tokens_b);

}  // namespace lvar
