#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dpmts/chain_common.hpp"
#include "dpmts/model.hpp"
#include "dpmts/priors.hpp"
#include "dpmts/sampler.hpp"

namespace dpmts {

/// Component of the stationarity-restricted mixture: the pair (z_{t-1}, z_t)
/// is bivariate normal with common marginal N(mu, sigma2) and lag correlation
/// -beta.
struct StationaryComponent {
  double mu = 0.0;
  double sigma2 = 1.0;
  double beta = 0.0;

  bool operator==(const StationaryComponent&) const = default;
};

struct StationaryHyperparams {
  double m = 0.0, v = 1.0;
  double s = 1.0, nu = 2.0;
  double theta = 0.0, c = 1.0;

  bool operator==(const StationaryHyperparams&) const = default;
};

struct StationaryState {
  std::vector<StationaryComponent> components;
  std::vector<double> zeta;
  std::vector<double> weights;
  double alpha = 1.0;
  StationaryHyperparams psi;

  std::size_t truncation() const { return components.size(); }
  void set_sticks(std::vector<double> sticks);
  /// Throws DomainError when |beta| >= 1, sigma2 <= 0 or the sticks are invalid.
  void validate() const;
};

/// sum_l q_l(z_prev) N(z | mu_l - beta_l (z_prev - mu_l), sigma2_l (1 - beta_l^2)),
/// q_l ∝ p_l N(z_prev | mu_l, sigma2_l).
double stationary_transition_density(double z, double z_prev, const StationaryState& state);

/// The invariant density sum_l p_l N(z | mu_l, sigma2_l).
double stationary_marginal_density(double z, const StationaryState& state);

/// Same transition written in the general parametrization:
/// (mu_x, mu_y, beta, delta_x, delta_y) = (mu, mu, beta, sigma2, sigma2 (1 - beta^2)).
MixtureState embed(const StationaryState& state);
/// Inverse of embed(); throws DomainError if the state is not of that form.
StationaryState restrict_state(const MixtureState& state, double tolerance = 1e-9);

/// Mass of N(theta, c) inside (-1, 1).
double beta_prior_mass(double theta, double c);

/// Metropolis-within-Gibbs sampler for the stationary mixture. The priors reuse
/// the general configuration with mu_x's constants for mu, delta_x's for sigma2
/// and the beta prior restricted to (-1, 1).
class StationarySampler {
 public:
  StationarySampler(std::vector<double> series, HyperpriorConfig config, SamplerSettings settings);
  StationarySampler(std::vector<double> series, HyperpriorConfig config, SamplerSettings settings,
                    StationaryState state, std::vector<int> labels, Rng rng,
                    std::size_t iteration = 0);
  static StationarySampler resume(const Checkpoint& checkpoint);

  void sweep();
  const PosteriorDraws& run(const std::function<void(const TraceRecord&)>& on_trace = {});

  void update_labels();
  void update_mu();
  void update_sigma2();
  void update_beta();
  void update_sticks();
  void update_alpha();
  void update_hyperparams();

  /// Gaussian factor of the mu full conditional (the rest is D^{-1}).
  NormalParams mu_gaussian_factor(std::size_t l) const;
  /// Inverse-gamma factor of the sigma2 full conditional.
  InvGammaParams sigma2_ig_factor(std::size_t l) const;
  /// Unnormalized log full conditional of beta_l; -inf outside (-1, 1).
  double beta_log_target(std::size_t l, double beta) const;

  const StationaryState& state() const { return state_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::size_t occupied() const;
  std::size_t iteration() const { return iteration_; }
  double log_likelihood() const;
  const SliceStats& slice_stats() const { return slice_; }
  const PosteriorDraws& draws() const { return draws_; }
  const std::vector<TraceRecord>& trace() const { return trace_; }
  Checkpoint checkpoint() const;

 private:
  void initialize();
  void refresh();
  void rebuild_members();
  void rebuild_cache();
  double log_kernel(std::size_t t, std::size_t l) const;
  double adapt(double scale, std::size_t attempts, double log_ratio) const;
  bool adapting() const { return settings_.adapt && iteration_ < settings_.burn_in; }

  std::vector<double> series_, x_, y_;
  HyperpriorConfig config_;
  SamplerSettings settings_;
  StationaryState state_;
  std::vector<int> labels_;
  Rng rng_;
  std::size_t iteration_ = 0;
  WeightKernelCache cache_;
  std::vector<std::size_t> counts_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<double> scale_mu_, scale_log_sigma2_, scale_beta_;
  MoveStats moves_mu_, moves_sigma2_, moves_beta_;
  MoveStats window_mu_, window_sigma2_;
  SliceStats slice_;
  PosteriorDraws draws_;
  std::vector<TraceRecord> trace_;
  std::size_t max_occupied_ = 0;
};

/// Retained draws are stored embedded in the general parametrization, tagged
/// with model "stationary".
PosteriorDraws fit_stationary(std::vector<double> series, const HyperpriorConfig& config,
                              const SamplerSettings& settings);

}  // namespace dpmts
