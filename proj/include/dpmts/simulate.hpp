#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "dpmts/model.hpp"
#include "dpmts/random.hpp"

namespace dpmts {

/// Random walk with standard normal increments, starting at 0.
std::vector<double> simulate_brownian(std::size_t n, std::uint64_t seed);

/// Azzalini skew-normal SN(xi, omega, alpha): density
/// 2/omega phi((y - xi)/omega) Phi(alpha (y - xi)/omega).
struct SkewNormalParams {
  double xi = 0.0;
  double omega = 1.0;
  double alpha_skew = 0.0;

  void validate() const;
};

double sn_log_pdf(double y, const SkewNormalParams& p);
double sn_mean(const SkewNormalParams& p);
double sn_variance(const SkewNormalParams& p);
/// Third central moment; its sign is the sign of alpha_skew.
double sn_third_central_moment(const SkewNormalParams& p);
double sn_sample(const SkewNormalParams& p, Rng& rng);

/// Transition law of the skew-normal test process:
/// SN(0, 1 + 0.7 |z_prev|, 0.1 + 4 sin(z_prev)).
SkewNormalParams skew_normal_transition(double z_prev);

/// z_1 = z1, then z_t drawn from skew_normal_transition(z_{t-1}).
std::vector<double> simulate_skew_normal_series(std::size_t n, double z1, std::uint64_t seed);

/// Ancestral sampling from a mixture transition: pick component l with
/// probability q_l(z_{t-1}), then draw from its regression kernel.
std::vector<double> simulate_from_model(const MixtureState& state, double z1, std::size_t n,
                                        std::uint64_t seed);

}  // namespace dpmts
