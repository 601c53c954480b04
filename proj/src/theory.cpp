#include "lvar/theory.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lvar {

void validate(const AnisotropyParams& p) {
  if (!(p.mu_norm > 0.0) || !std::isfinite(p.mu_norm)) {
    throw std::invalid_argument("mu_norm must be finite and > 0, got " +
                                std::to_string(p.mu_norm));
  }
  if (!(p.sigma >= 0.0) || !std::isfinite(p.sigma)) {
    throw std::invalid_argument("sigma must be finite and >= 0, got " +
                                std::to_string(p.sigma));
  }
  if (p.dim < 1) {
    throw std::invalid_argument("dim must be >= 1, got " +
                                std::to_string(p.dim));
  }
}

void validate(const LengthPair& len) {
  if (len.m < 1 || len.n < 1) {
    throw std::invalid_argument("lengths must be >= 1, got m=" +
                                std::to_string(len.m) + " n=" +
                                std::to_string(len.n));
  }
}

double anisotropy_ratio(const AnisotropyParams& p) {
  validate(p);
  return p.sigma * p.sigma * static_cast<double>(p.dim) /
         (p.mu_norm * p.mu_norm);
}

double expected_cosine_rho(double rho, double m, double n) {
  return 1.0 / (std::sqrt(1.0 + rho / m) * std::sqrt(1.0 + rho / n));
}

double expected_cosine(const AnisotropyParams& p, const LengthPair& len) {
  validate(len);
  return expected_cosine_rho(anisotropy_ratio(p), static_cast<double>(len.m),
                             static_cast<double>(len.n));
}

double taylor_cosine_rho(double rho, double m, double n) {
  return 1.0 - 0.5 * rho * (1.0 / m + 1.0 / n);
}

double taylor_cosine(const AnisotropyParams& p, const LengthPair& len) {
  validate(len);
  return taylor_cosine_rho(anisotropy_ratio(p), static_cast<double>(len.m),
                           static_cast<double>(len.n));
}

double artifact_signal(const LengthPair& len) {
  validate(len);
  return std::abs(1.0 / static_cast<double>(len.m) -
                  1.0 / static_cast<double>(len.n));
}

}  // namespace lvar
