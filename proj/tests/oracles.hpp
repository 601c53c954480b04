#pragma once

// Brute-force reference implementations, deliberately independent of the
// library's evaluation routes: plain loops, literal formulas, no Eigen
// factorizations. These stay in test code only.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace lvar::testing {

// Column-centered copy computed with explicit loops.
inline Eigen::MatrixXd center_columns(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = m;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) mean += m(r, c);
    mean /= static_cast<double>(m.rows());
    for (Eigen::Index r = 0; r < m.rows(); ++r) out(r, c) -= mean;
  }
  return out;
}

// ||Yc' Xc||_F^2 / (||Xc' Xc||_F ||Yc' Yc||_F) via the literal d x d
// products, entry by entry.
inline double brute_linear_cka(const Eigen::MatrixXd& x,
                               const Eigen::MatrixXd& y,
                               bool center = true) {
  Eigen::MatrixXd xc = center ? center_columns(x) : x;
  Eigen::MatrixXd yc = center ? center_columns(y) : y;

  auto product_frob2 = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    // ||a' b||_F^2 with explicit loops
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
      for (Eigen::Index j = 0; j < b.cols(); ++j) {
        double entry = 0.0;
        for (Eigen::Index t = 0; t < a.rows(); ++t) entry += a(t, i) * b(t, j);
        total += entry * entry;
      }
    }
    return total;
  };

  const double num = product_frob2(yc, xc);
  const double den_x = std::sqrt(product_frob2(xc, xc));
  const double den_y = std::sqrt(product_frob2(yc, yc));
  return num / (den_x * den_y);
}

// tr(Sxy Syx) / sqrt(tr(Sxx^2) tr(Syy^2)) via explicit scatter matrices.
inline double brute_rv(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  Eigen::MatrixXd xc = center_columns(x);
  Eigen::MatrixXd yc = center_columns(y);

  auto scatter = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd s(a.cols(), b.cols());
    for (Eigen::Index i = 0; i < a.cols(); ++i) {
      for (Eigen::Index j = 0; j < b.cols(); ++j) {
        double v = 0.0;
        for (Eigen::Index t = 0; t < a.rows(); ++t) v += a(t, i) * b(t, j);
        s(i, j) = v;
      }
    }
    return s;
  };
  auto trace_product = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    // tr(a b) with explicit loops; a is (p x q), b is (q x p)
    double tr = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      for (Eigen::Index k = 0; k < a.cols(); ++k) tr += a(i, k) * b(k, i);
    }
    return tr;
  };

  Eigen::MatrixXd sxy = scatter(xc, yc);
  Eigen::MatrixXd syx = scatter(yc, xc);
  Eigen::MatrixXd sxx = scatter(xc, xc);
  Eigen::MatrixXd syy = scatter(yc, yc);
  return trace_product(sxy, syx) /
         std::sqrt(trace_product(sxx, sxx) * trace_product(syy, syy));
}

struct BruteOls {
  std::vector<double> betas;
  double r2 = 0.0;
};

// Standardized OLS via the normal equations, solved with hand-rolled
// Gauss-Jordan elimination with partial pivoting.
inline BruteOls brute_ols_standardized(
    const std::vector<std::vector<double>>& predictors,
    const std::vector<double>& dependent) {
  const std::size_t n = dependent.size();
  const std::size_t p = predictors.size();

  auto zscore = [n](const std::vector<double>& col) {
    double mean = 0.0;
    for (double v : col) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : col) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (col[i] - mean) / sd;
    return out;
  };

  std::vector<std::vector<double>> xz(p);
  for (std::size_t j = 0; j < p; ++j) xz[j] = zscore(predictors[j]);
  std::vector<double> yz = zscore(dependent);

  // normal equations: (X'X) beta = X'y
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < n; ++t) dot += xz[i][t] * xz[j][t];
      a[i][j] = dot;
    }
    double dot = 0.0;
    for (std::size_t t = 0; t < n; ++t) dot += xz[i][t] * yz[t];
    a[i][p] = dot;
  }

  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-12) {
      throw std::runtime_error("brute OLS: singular normal equations");
    }
    std::swap(a[col], a[pivot]);
    const double diag = a[col][col];
    for (std::size_t c = col; c <= p; ++c) a[col][c] /= diag;
    for (std::size_t r = 0; r < p; ++r) {
      if (r == col) continue;
      const double factor = a[r][col];
      for (std::size_t c = col; c <= p; ++c) a[r][c] -= factor * a[col][c];
    }
  }

  BruteOls out;
  out.betas.resize(p);
  for (std::size_t j = 0; j < p; ++j) out.betas[j] = a[j][p];

  double rss = 0.0;
  double tss = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    double fitted = 0.0;
    for (std::size_t j = 0; j < p; ++j) fitted += out.betas[j] * xz[j][t];
    rss += (yz[t] - fitted) * (yz[t] - fitted);
    tss += yz[t] * yz[t];
  }
  out.r2 = 1.0 - rss / tss;
  return out;
}

}  // namespace lvar::testing
