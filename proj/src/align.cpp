#include "lvar/align.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace lvar {

void validate(const AlignedPositions& p, Eigen::Index len_a,
              Eigen::Index len_b) {
  if (p.idx_a.size() != p.idx_b.size()) {
    throw std::invalid_argument("aligned index lists differ in length: " +
                                std::to_string(p.idx_a.size()) + " vs " +
                                std::to_string(p.idx_b.size()));
  }
  std::unordered_set<Eigen::Index> seen_b;
  for (std::size_t i = 0; i < p.idx_a.size(); ++i) {
    if (p.idx_a[i] < 0 || p.idx_a[i] >= len_a) {
      throw std::invalid_argument("aligned position " +
                                  std::to_string(p.idx_a[i]) +
                                  " out of range for side a");
    }
    if (p.idx_b[i] < 0 || p.idx_b[i] >= len_b) {
      throw std::invalid_argument("aligned position " +
                                  std::to_string(p.idx_b[i]) +
                                  " out of range for side b");
    }
    if (i > 0 && p.idx_a[i] <= p.idx_a[i - 1]) {
      throw std::invalid_argument(
          "idx_a must be strictly increasing, violated at entry " +
          std::to_string(i));
    }
    if (!seen_b.insert(p.idx_b[i]).second) {
      throw std::invalid_argument("idx_b contains duplicate position " +
                                  std::to_string(p.idx_b[i]));
    }
  }
}

AlignedPositions shared_token_positions(
    const std::vector<std::string>& tokens_a,
    const std::vector<std::string>& tokens_b) {
  if (tokens_a.empty() || tokens_b.empty()) {
    throw std::invalid_argument("shared_token_positions requires non-empty token lists");
  }
  std::unordered_map<std::string, std::vector<Eigen::Index>> positions_b;
  for (std::size_t j = 0; j < tokens_b.size(); ++j) {
    positions_b[tokens_b[j]].push_back(static_cast<Eigen::Index>(j));
  }

  // Occurrence-order matching: the k-th occurrence in a pairs with the k-th
  // occurrence in b. Walking a in order keeps idx_a strictly increasing.
  std::unordered_map<std::string, std::size_t> used;
  AlignedPositions out;
  for (std::size_t i = 0; i < tokens_a.size(); ++i) {
    auto it = positions_b.find(tokens_a[i]);
    if (it == positions_b.end()) continue;
    std::size_t& k = used[tokens_a[i]];
    if (k >= it->second.size()) continue;
    out.idx_a.push_back(static_cast<Eigen::Index>(i));
    out.idx_b.push_back(it->second[k]);
    ++k;
  }
  return out;
}

bool filter_min_shared(const AlignedPositions& p, std::size_t k) {
  if (k < 1) {
    throw std::invalid_argument("filter_min_shared requires k >= 1");
  }
  return p.size() >= k;
}

double shared_token_fraction(const std::vector<std::string>& tokens_a,
                             const std::vector<std::string>& tokens_b,
                             SharedFractionMode mode) {
  if (tokens_a.empty() || tokens_b.empty()) {
    throw std::invalid_argument("shared_token_fraction requires non-empty token lists");
  }
  if (mode == SharedFractionMode::TypeJaccard) {
    std::unordered_set<std::string> types_a(tokens_a.begin(), tokens_a.end());
    std::unordered_set<std::string> types_b(tokens_b.begin(), tokens_b.end());
    std::size_t shared = 0;
    for (const auto& t : types_a) shared += types_b.count(t);
    std::size_t total = types_a.size() + types_b.size() - shared;
    return static_cast<double>(shared) / static_cast<double>(total);
  }
  std::unordered_map<std::string, std::size_t> count_a;
  for (const auto& t : tokens_a) ++count_a[t];
  std::unordered_map<std::string, std::size_t> count_b;
  for (const auto& t : tokens_b) ++count_b[t];
  std::size_t shared_mass = 0;
  for (const auto& [tok, ca] : count_a) {
    auto it = count_b.find(tok);
    if (it != count_b.end()) shared_mass += std::min(ca, it->second);
  }
  return 2.0 * static_cast<double>(shared_mass) /
         static_cast<double>(tokens_a.size() + tokens_b.size());
}

double length_ratio(std::size_t len_a, std::size_t len_b) {
  if (len_a == 0 || len_b == 0) {
    throw std::invalid_argument("length_ratio requires non-empty sequences");
  }
  return static_cast<double>(std::min(len_a, len_b)) /
         static_cast<double>(std::max(len_a, len_b));
}

double length_ratio(const std::vector<std::string>& tokens_a,
                    const std::vector<std::string>& tokens_b) {
  return length_ratio(tokens_a.size(), tokens_b.size());
}

}  // namespace lvar
