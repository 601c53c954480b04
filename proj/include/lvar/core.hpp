#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace lvar {

enum class Pooling { Mean, LastToken };

// One sequence's hidden states at one layer: T token rows by d hidden
// columns, plus the token surface forms (empty for synthetic data).
struct TokenMatrix {
  Eigen::MatrixXd values;           // T x d
  std::vector<std::string> tokens;  // empty, or exactly T entries
  int layer_index = 0;

  Eigen::Index length() const { return values.rows(); }
  Eigen::Index dim() const { return values.cols(); }
};

// Throws std::invalid_argument naming the offending field / row / column.
void validate(const TokenMatrix& m);

TokenMatrix make_token_matrix(Eigen::MatrixXd values,
                              std::vector<std::string> tokens = {},
                              int layer_index = 0);

struct PooledVector {
  Eigen::VectorXd values;
  Eigen::Index source_length = 0;
  Pooling pooling = Pooling::Mean;
};

// Inclusive layer index range.
struct LayerRange {
  int lo = 0;
  int hi = 0;
};

// Column means over token rows. Accumulates with pairwise (tree) summation so
// the result is stable for d = 4096 and T in the thousands.
PooledVector mean_pool(const TokenMatrix& m);

PooledVector last_token_pool(const TokenMatrix& m);

// [floor(n/4), floor(3n/4)], clamped to valid indices. Requires n_layers >= 4.
LayerRange middle_layers(int n_layers);

}  // namespace lvar
