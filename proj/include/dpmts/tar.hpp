#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dpmts/sampler.hpp"
#include "dpmts/stats.hpp"
#include "dpmts/transition.hpp"

namespace dpmts {

/// Two-regime threshold AR(1): regime 1 when z_{t-1} <= r, regime 2 otherwise,
/// z_t ~ N(phi0_k + phi1_k z_{t-1}, tau_k).
struct TarParams {
  double phi0_1 = 0.0, phi1_1 = 0.0, tau_1 = 1.0;
  double phi0_2 = 0.0, phi1_2 = 0.0, tau_2 = 1.0;
  double r = 0.0;

  bool operator==(const TarParams&) const = default;
};

struct TarPriors {
  double phi0_mean = 0.0, phi0_var = 1.0;
  double phi1_mean = 0.0, phi1_var = 2.0;
  double tau_shape = 2.0, tau_scale = 1.0;
  /// Uniform prior support of the threshold.
  double r_lo = 0.0, r_hi = 1.0;

  void validate() const;
  bool operator==(const TarPriors&) const = default;
};

/// Intercepts N(midrange, sample variance), slopes N(0, 2), variances
/// IG(2, s) with s the residual mean square of a least-squares AR(1) fit
/// (prior mean s), threshold uniform between the 10th and 90th percentiles.
TarPriors tar_default_priors(std::span<const double> series);

struct TarFit {
  DrawsMeta meta;
  TarPriors priors;
  std::vector<std::size_t> iterations;
  std::vector<TarParams> draws;
  double threshold_acceptance = 0.0;
};

/// Gibbs for each regime's (phi0, phi1) jointly and tau, random-walk Metropolis
/// for r. Proposals leaving either regime with fewer than 2 pairs are rejected.
class TarSampler {
 public:
  TarSampler(std::vector<double> series, TarPriors priors, SamplerSettings settings);

  void sweep();
  const TarFit& run();

  /// Conjugate conditionals of one regime given the current r: mean and
  /// covariance of (phi0, phi1), and the IG parameters of tau.
  struct Coefficients {
    double mean[2];
    double cov[2][2];
  };
  Coefficients coefficient_conditional(int regime) const;
  InvGammaParams tau_conditional(int regime) const;
  /// Log-likelihood of the pairs given the current parameters at threshold r.
  double log_likelihood(double r) const;
  std::size_t regime_count(int regime, double r) const;

  const TarParams& state() const { return state_; }
  TarParams& mutable_state() { return state_; }
  const TarFit& fit() const { return fit_; }

 private:
  std::vector<double> series_, x_, y_;
  TarPriors priors_;
  SamplerSettings settings_;
  TarParams state_;
  Rng rng_;
  std::size_t iteration_ = 0;
  double scale_r_ = 1.0;
  std::uint64_t proposed_ = 0, accepted_ = 0;
  TarFit fit_;
};

TarFit fit_tar(std::vector<double> series, const TarPriors& priors, const SamplerSettings& settings);

/// Transition draws of the TAR model, each a single Gaussian.
class TarDraws final : public TransitionDraws {
 public:
  explicit TarDraws(std::span<const TarParams> draws) : draws_(draws) {}
  std::size_t size() const override { return draws_.size(); }
  ConditionalMixture conditional(std::size_t draw, double z_prev) const override;

 private:
  std::span<const TarParams> draws_;
};

}  // namespace dpmts
