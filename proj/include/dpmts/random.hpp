#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace dpmts {

/// SplitMix64 finalizer; derives independent stream seeds from (seed, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Random source for every sampler in the library.
///
/// Wraps a 64-bit Mersenne Twister together with the persistent normal and
/// gamma distribution objects, so that the full generator state (including
/// cached normal variates) can be serialized and restored bit-exactly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 1);

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Normal draw, parametrized by variance.
  double normal(double mean, double variance);
  double standard_normal();
  /// Gamma with shape and rate (mean shape / rate).
  double gamma(double shape, double rate);
  /// Inverse gamma with shape a and scale b (density ∝ x^{-a-1} e^{-b/x}).
  double inverse_gamma(double shape, double scale);
  double beta(double a, double b);
  /// Index drawn with probability proportional to exp(log_weights[i]).
  std::size_t categorical_log(std::span<const double> log_weights);

  std::string serialize() const;
  static Rng deserialize(const std::string& text);

  bool operator==(const Rng& other) const;

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::gamma_distribution<double> gamma_;
};

/// Beta(a, b) restricted to (lo, hi), drawn by inverse CDF.
///
/// Uses the regularized incomplete beta function in whichever tail is better
/// conditioned. When the interval mass is too small for the inverse to resolve
/// it, falls back to bisection on a quadrature CDF of the unnormalized density
/// over (lo, hi).
double sample_truncated_beta(double a, double b, double lo, double hi, Rng& rng);

/// Same as above but with the uniform variate supplied by the caller.
double truncated_beta_quantile(double a, double b, double lo, double hi, double u);

}  // namespace dpmts
