#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace dpmts {

inline constexpr double kLogTwoPi = 1.8378770664093454835606594728112;

/// Log density of N(mean, variance). Parametrized by variance throughout.
inline double log_normal_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(variance) + d * d / variance);
}

inline double normal_pdf(double x, double mean, double variance) {
  return std::exp(log_normal_pdf(x, mean, variance));
}

/// Standard normal CDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// log(sum(exp(values))). Returns -inf for an empty span or all -inf entries.
double log_sum_exp(std::span<const double> values);

}  // namespace dpmts
