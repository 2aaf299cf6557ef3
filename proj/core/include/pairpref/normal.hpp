#pragma once

#include <cmath>
#include <numbers>

namespace pairpref {

/// Lower bound applied to response probabilities before taking logs.
inline constexpr double kProbabilityFloor = 1e-12;

/// Standard normal CDF.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
}

inline double normal_log_pdf(double z) {
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// Inverse of the standard normal CDF. Throws DomainError unless 0 < p < 1.
double normal_quantile(double p);

inline double clamp_probability(double p) {
  if (p < kProbabilityFloor) return kProbabilityFloor;
  if (p > 1.0 - kProbabilityFloor) return 1.0 - kProbabilityFloor;
  return p;
}

/// Binary entropy in bits; h(0) = h(1) = 0.
inline double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

}  // namespace pairpref
