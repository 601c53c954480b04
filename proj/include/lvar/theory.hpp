#pragma once

#include <cstdint>

namespace lvar {

// Parameters of the anisotropic token model h_i = mu + sigma * eps_i.
struct AnisotropyParams {
  double mu_norm = 1.0;  // ||mu|| > 0
  double sigma = 0.0;    // per-coordinate noise scale, >= 0
  int dim = 1;           // hidden dimension d >= 1
};

void validate(const AnisotropyParams& p);

struct LengthPair {
  std::int64_t m = 1;
  std::int64_t n = 1;
};

void validate(const LengthPair& len);

// rho = sigma^2 d / ||mu||^2: noise energy relative to shared-direction
// energy. Governs how strongly mean-pooled cosine depends on length.
double anisotropy_ratio(const AnisotropyParams& p);

// Closed-form prediction for the expected cosine of two mean-pooled
// sequences of lengths m and n:
//
//   1 / ( sqrt(1 + rho/m) * sqrt(1 + rho/n) )
//
// Strictly increasing in both lengths for rho > 0.
double expected_cosine(const AnisotropyParams& p, const LengthPair& len);
double expected_cosine_rho(double rho, double m, double n);

// First-order expansion 1 - (rho/2)(1/m + 1/n), valid for rho(1/m+1/n) << 1.
double taylor_cosine(const AnisotropyParams& p, const LengthPair& len);
double taylor_cosine_rho(double rho, double m, double n);

// |1/m - 1/n|: how short and asymmetric the lengths are, the quantity the
// length artifact responds to.
double artifact_signal(const LengthPair& len);

}  // namespace lvar
