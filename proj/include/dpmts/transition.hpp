#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dpmts/model.hpp"
#include "dpmts/random.hpp"

namespace dpmts {

/// The law of Z_t given Z_{t-1} = z_prev under one posterior draw: a finite
/// Gaussian mixture with normalized weights (stored as logs).
struct ConditionalMixture {
  std::vector<double> log_weights;
  std::vector<double> means;
  std::vector<double> variances;

  double log_density(double z) const;
  double density(double z) const;
  double mean() const;
  double sample(Rng& rng) const;
};

/// A collection of posterior draws of some first-order transition density.
/// Implemented by the general mixture, the stationary mixture (through its
/// embedding) and the TAR baseline; all inference runs against this.
class TransitionDraws {
 public:
  virtual ~TransitionDraws() = default;
  virtual std::size_t size() const = 0;
  virtual ConditionalMixture conditional(std::size_t draw, double z_prev) const = 0;
};

ConditionalMixture conditional_mixture(const MixtureState& state, double z_prev);

/// Non-owning view over mixture states.
class MixtureDraws final : public TransitionDraws {
 public:
  explicit MixtureDraws(std::span<const MixtureState> states) : states_(states) {}
  std::size_t size() const override { return states_.size(); }
  ConditionalMixture conditional(std::size_t draw, double z_prev) const override {
    return conditional_mixture(states_[draw], z_prev);
  }

 private:
  std::span<const MixtureState> states_;
};

}  // namespace dpmts
