#include "dpmts/simulate.hpp"

#include <cmath>
#include <numbers>

#include "dpmts/errors.hpp"
#include "dpmts/gaussian.hpp"
#include "dpmts/transition.hpp"

namespace dpmts {

std::vector<double> simulate_brownian(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw DomainError("series length must be at least 2");
  Rng rng(seed);
  std::vector<double> z(n, 0.0);
  for (std::size_t t = 1; t < n; ++t) z[t] = z[t - 1] + rng.standard_normal();
  return z;
}

void SkewNormalParams::validate() const {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw DomainError("skew-normal scale must be positive");
  if (!std::isfinite(xi) || !std::isfinite(alpha_skew)) throw DomainError("skew-normal parameters must be finite");
}

namespace {
double delta_of(const SkewNormalParams& p) { return p.alpha_skew / std::sqrt(1.0 + p.alpha_skew * p.alpha_skew); }
}  // namespace

double sn_log_pdf(double y, const SkewNormalParams& p) {
  p.validate();
  const double u = (y - p.xi) / p.omega;
  return std::log(2.0) - std::log(p.omega) - 0.5 * (kLogTwoPi + u * u) + std::log(normal_cdf(p.alpha_skew * u));
}

double sn_mean(const SkewNormalParams& p) {
  return p.xi + p.omega * delta_of(p) * std::sqrt(2.0 / std::numbers::pi);
}

double sn_variance(const SkewNormalParams& p) {
  const double d = delta_of(p);
  return p.omega * p.omega * (1.0 - 2.0 * d * d / std::numbers::pi);
}

double sn_third_central_moment(const SkewNormalParams& p) {
  const double m = delta_of(p) * std::sqrt(2.0 / std::numbers::pi);
  return std::pow(p.omega, 3) * 0.5 * (4.0 - std::numbers::pi) * m * m * m;
}

double sn_sample(const SkewNormalParams& p, Rng& rng) {
  const double d = delta_of(p);
  const double u0 = std::abs(rng.standard_normal());
  const double v = rng.standard_normal();
  return p.xi + p.omega * (d * u0 + std::sqrt(1.0 - d * d) * v);
}

SkewNormalParams skew_normal_transition(double z_prev) {
  return {0.0, 1.0 + 0.7 * std::abs(z_prev), 0.1 + 4.0 * std::sin(z_prev)};
}

std::vector<double> simulate_skew_normal_series(std::size_t n, double z1, std::uint64_t seed) {
  if (n < 2) throw DomainError("series length must be at least 2");
  Rng rng(seed);
  std::vector<double> z(n);
  z[0] = z1;
  for (std::size_t t = 1; t < n; ++t) z[t] = sn_sample(skew_normal_transition(z[t - 1]), rng);
  return z;
}

std::vector<double> simulate_from_model(const MixtureState& state, double z1, std::size_t n,
                                        std::uint64_t seed) {
  if (n < 1) throw DomainError("series length must be at least 1");
  state.validate();
  Rng rng(seed);
  std::vector<double> z(n);
  z[0] = z1;
  for (std::size_t t = 1; t < n; ++t) z[t] = conditional_mixture(state, z[t - 1]).sample(rng);
  return z;
}

}  // namespace dpmts
