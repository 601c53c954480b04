#include "lvar/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace lvar {

namespace {

Eigen::VectorXd pairwise_row_sum(const Eigen::MatrixXd& m, Eigen::Index lo,
                                 Eigen::Index hi) {
  if (hi - lo <= 8) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(m.cols());
    for (Eigen::Index r = lo; r < hi; ++r) acc += m.row(r).transpose();
    return acc;
  }
  Eigen::Index mid = lo + (hi - lo) / 2;
  return pairwise_row_sum(m, lo, mid) + pairwise_row_sum(m, mid, hi);
}

}  // namespace

void validate(const TokenMatrix& m) {
  if (m.values.rows() < 1 || m.values.cols() < 1) {
    throw std::invalid_argument(
        "token matrix must have at least one row and one column, got " +
        std::to_string(m.values.rows()) + "x" + std::to_string(m.values.cols()));
  }
  if (m.layer_index < 0) {
    throw std::invalid_argument("token matrix layer_index must be >= 0, got " +
                                std::to_string(m.layer_index));
  }
  if (!m.tokens.empty() &&
      static_cast<Eigen::Index>(m.tokens.size()) != m.values.rows()) {
    throw std::invalid_argument(
        "token list length " + std::to_string(m.tokens.size()) +
        " does not match row count " + std::to_string(m.values.rows()));
  }
  if (!m.values.allFinite()) {
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
        if (!std::isfinite(m.values(r, c))) {
          throw std::invalid_argument("non-finite value at row " +
                                      std::to_string(r) + ", column " +
                                      std::to_string(c));
        }
      }
    }
  }
}

TokenMatrix make_token_matrix(Eigen::MatrixXd values,
                              std::vector<std::string> tokens,
                              int layer_index) {
  TokenMatrix m{std::move(values), std::move(tokens), layer_index};
  validate(m);
  return m;
}

PooledVector mean_pool(const TokenMatrix& m) {
  validate(m);
  const Eigen::Index t = m.values.rows();
  Eigen::VectorXd sum = pairwise_row_sum(m.values, 0, t);
  return PooledVector{sum / static_cast<double>(t), t, Pooling::Mean};
}

PooledVector last_token_pool(const TokenMatrix& m) {
  validate(m);
  return PooledVector{m.values.row(m.values.rows() - 1).transpose(),
                      m.values.rows(), Pooling::LastToken};
}

LayerRange middle_layers(int n_layers) {
  if (n_layers < 4) {
    throw std::invalid_argument("middle_layers requires n_layers >= 4, got " +
                                std::to_string(n_layers));
  }
  int lo = n_layers / 4;
  int hi = (3 * n_layers) / 4;
  lo = std::min(std::max(lo, 0), n_layers - 1);
  hi = std::min(std::max(hi, lo), n_layers - 1);
  return LayerRange{lo, hi};
}

}  // namespace lvar
