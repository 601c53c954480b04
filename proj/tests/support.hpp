#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "lvar/bundle.hpp"
#include "lvar/rng.hpp"

namespace lvar::testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                                     CounterRng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = rng.normal();
  }
  return m;
}

// Random orthogonal matrix via QR of a Gaussian matrix.
inline Eigen::MatrixXd random_orthogonal(Eigen::Index n, CounterRng& rng) {
  Eigen::MatrixXd g = random_matrix(n, n, rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  return q;
}

// Unique scratch directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("lvar_test_" + tag + "_" + std::to_string(++counter) + "_" +
             std::to_string(::getpid()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

struct GradientBundleConfig {
  int n_problems = 40;
  int n_layers = 1;
  int dim = 256;
  double mu_norm = 2.5;
  double sigma = 1.0;
  std::int64_t base_length = 40;
  double ratio_lo = 0.2;
  double ratio_hi = 1.0;
  int vocabulary = 40;
  std::uint64_t seed = 1;
  std::vector<std::string> languages{"alpha", "beta"};
};

// Parallel two-language (or more) bundle with a planted length gradient:
// language 0 always has base_length tokens, language k >= 1 has
// floor(base_length * r_i) tokens with r_i an evenly spaced grid over
// [ratio_lo, ratio_hi]. Varying the short side mirrors the real-corpus
// regime (the compact language drives the ratio), so mean-pooled cosine
// rises with the ratio. Token strings come from a small vocabulary so
// shared-surface-form alignment has plenty of positions; depth covariates
// are independent noise.
inline ActivationBundle gradient_bundle(const GradientBundleConfig& cfg) {
  ActivationBundle bundle;
  bundle.n_layers = cfg.n_layers;
  bundle.dim = cfg.dim;

  for (int prob = 0; prob < cfg.n_problems; ++prob) {
    const double t = cfg.n_problems == 1
                         ? 0.0
                         : static_cast<double>(prob) /
                               static_cast<double>(cfg.n_problems - 1);
    const double ratio = cfg.ratio_lo + (cfg.ratio_hi - cfg.ratio_lo) * t;
    char id[32];
    std::snprintf(id, sizeof(id), "p%04d", prob);

    for (std::size_t lang = 0; lang < cfg.languages.size(); ++lang) {
      const std::int64_t length =
          lang == 0 ? cfg.base_length
                    : std::max<std::int64_t>(
                          1, static_cast<std::int64_t>(std::floor(
                                 static_cast<double>(cfg.base_length) * ratio)));
      CounterRng rng(cfg.seed,
                     static_cast<std::uint64_t>(prob) * 1000 + lang);
      SequenceEntry seq;
      seq.id = id;
      seq.language = cfg.languages[lang];
      seq.depth = 1.0 + rng.uniform(0.0, 9.0);
      for (std::int64_t i = 0; i < length; ++i) {
        seq.tokens.push_back(
            "w" + std::to_string(rng.uniform_below(
                      static_cast<std::uint64_t>(cfg.vocabulary))));
      }
      for (int layer = 0; layer < cfg.n_layers; ++layer) {
        TokenMatrix m;
        m.layer_index = layer;
        m.values.resize(length, cfg.dim);
        for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
          for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
            m.values(r, c) = cfg.sigma * rng.normal();
          }
        }
        m.values.col(0).array() += cfg.mu_norm;
        seq.layers.push_back(std::move(m));
      }
      bundle.sequences.push_back(std::move(seq));
    }
  }
  return bundle;
}

}  // namespace lvar::testing
