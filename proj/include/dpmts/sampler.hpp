#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dpmts/chain_common.hpp"
#include "dpmts/model.hpp"
#include "dpmts/priors.hpp"
#include "dpmts/random.hpp"

namespace dpmts {

/// Run-length and proposal settings. Defaults retain 5,000 draws, every 20th
/// iteration after a 10,000-iteration burn-in.
struct SamplerSettings {
  std::size_t n_iterations = 110000;
  std::size_t burn_in = 10000;
  std::size_t thin = 20;
  /// Random-walk standard deviations; 0 selects 0.1 * (range / 4) for mu_x
  /// and 0.3 for log delta_x.
  double rw_scale_mu_x = 0.0;
  double rw_scale_log_delta_x = 0.0;
  /// Robbins-Monro scale adaptation toward 0.3 acceptance, burn-in only.
  bool adapt = true;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t retained() const { return n_iterations > burn_in ? (n_iterations - burn_in) / thin : 0; }
  bool operator==(const SamplerSettings&) const = default;
};

/// Complete state of one chain.
struct ChainState {
  MixtureState mixture;
  std::vector<int> labels;  // component of pair t (0-based), t = 0..n-2
  std::size_t iteration = 0;
  Rng rng{1};
};

/// Identity of a fit, echoed into every export.
struct DrawsMeta {
  std::string model = "general";
  std::size_t n = 0;
  std::size_t truncation = 0;
  std::uint64_t seed = 0;
  std::uint64_t series_hash = 0;
  SamplerSettings settings;
};

/// Thinned posterior sample of the general mixture model.
struct PosteriorDraws {
  DrawsMeta meta;
  std::vector<std::size_t> iterations;
  std::vector<MixtureState> draws;
};

/// Per-component random-walk bookkeeping.
struct MoveStats {
  std::vector<std::uint64_t> proposed, accepted;
  void resize(std::size_t n) {
    proposed.assign(n, 0);
    accepted.assign(n, 0);
  }
  double rate(std::size_t l) const {
    return proposed[l] ? static_cast<double>(accepted[l]) / static_cast<double>(proposed[l]) : 0.0;
  }
};

/// One line of the run log, written at every retained iteration.
struct TraceRecord {
  std::size_t iteration = 0;
  std::size_t occupied = 0;
  double alpha = 0.0;
  double log_likelihood = 0.0;
  double accept_mu_x = 0.0;        // over occupied random-walk moves since the last record
  double accept_log_delta_x = 0.0;
  std::uint64_t slice_violations = 0;
};

/// Resumable snapshot of a sampler.
struct Checkpoint {
  std::string model = "general";
  std::vector<double> series;
  HyperpriorConfig config;
  SamplerSettings settings;
  ChainState chain;
  std::vector<double> scale_mu_x, scale_log_delta_x, scale_beta;
  MoveStats moves_mu_x, moves_delta_x, moves_beta;
  MoveStats window_mu_x, window_delta_x;
  std::size_t max_occupied = 0;
  SliceStats slice;
  PosteriorDraws draws;
  std::vector<TraceRecord> trace;
};

/// FNV-1a hash of the bit patterns of a series; identifies the data a fit used.
std::uint64_t series_fingerprint(std::span<const double> series);

/// Blocked Gibbs / Metropolis sampler for the general mixture transition model.
///
/// One sweep updates, in order: labels, (mu_y, delta_y, beta) per component,
/// mu_x, delta_x, the sticks, alpha, and the G0 hyperparameters. Each update is
/// public so that it can be exercised in isolation.
class GeneralSampler {
 public:
  /// Validates inputs and initializes the chain (k-means on the lag pairs).
  GeneralSampler(std::vector<double> series, HyperpriorConfig config, SamplerSettings settings);
  /// Starts from an explicit state, e.g. a hand-built test configuration.
  GeneralSampler(std::vector<double> series, HyperpriorConfig config, SamplerSettings settings,
                 ChainState state);
  static GeneralSampler resume(const Checkpoint& checkpoint);

  void sweep();
  /// Sweeps until settings.n_iterations, retaining thinned draws.
  const PosteriorDraws& run(const std::function<void(const TraceRecord&)>& on_trace = {});

  void update_labels();
  void update_mu_y();
  void update_delta_y();
  void update_beta();
  void update_mu_x();
  void update_delta_x();
  void update_sticks();
  void update_alpha();
  void update_hyperparams();

  // Full conditionals of the conjugate updates (for occupied components).
  NormalParams mu_y_conditional(std::size_t l) const;
  InvGammaParams delta_y_conditional(std::size_t l) const;
  NormalParams beta_conditional(std::size_t l) const;
  /// Gaussian factor N(mu_x | m*, v*) of the mu_x full conditional.
  NormalParams mu_x_gaussian_factor(std::size_t l) const;
  /// Inverse-gamma factor of the delta_x full conditional.
  InvGammaParams delta_x_ig_factor(std::size_t l) const;
  GammaParams alpha_conditional() const;
  NormalParams m_x_conditional() const;
  InvGammaParams v_x_conditional() const;
  NormalParams m_y_conditional() const;
  InvGammaParams v_y_conditional() const;
  GammaParams s_x_conditional() const;
  GammaParams s_y_conditional() const;
  NormalParams theta_conditional() const;
  InvGammaParams c_conditional() const;

  /// Log acceptance ratio used for an independence proposal from G0 to an
  /// empty component's mu_x: log D(current) - log D(proposal).
  double empty_mu_x_log_ratio(std::size_t l, double proposal);
  /// log D = sum_t log sum_m p_m N(z_{t-1} | mu_x_m, delta_x_m).
  double log_weight_normalizer() const { return cache_.log_normalizer(); }
  double log_likelihood() const;

  const ChainState& state() const { return state_; }
  ChainState& mutable_state() { return state_; }
  /// Rebuilds cached quantities after the state was edited directly.
  void refresh();
  const std::vector<std::size_t>& counts() const { return counts_; }
  std::size_t occupied() const;
  const std::vector<double>& series() const { return series_; }
  const HyperpriorConfig& config() const { return config_; }
  const SamplerSettings& settings() const { return settings_; }
  const SliceStats& slice_stats() const { return slice_; }
  const MoveStats& moves_mu_x() const { return moves_mu_x_; }
  const MoveStats& moves_delta_x() const { return moves_delta_x_; }
  const PosteriorDraws& draws() const { return draws_; }
  const std::vector<TraceRecord>& trace() const { return trace_; }
  std::size_t max_occupied() const { return max_occupied_; }
  Checkpoint checkpoint() const;

 private:
  void initialize();
  void rebuild_members();
  void rebuild_cache();
  double adapt_step(std::size_t attempts) const;

  std::vector<double> series_;
  std::vector<double> x_, y_;
  HyperpriorConfig config_;
  SamplerSettings settings_;
  ChainState state_;
  WeightKernelCache cache_;
  std::vector<std::size_t> counts_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<double> scale_mu_x_, scale_log_delta_x_;
  MoveStats moves_mu_x_, moves_delta_x_;
  MoveStats window_mu_x_, window_delta_x_;
  SliceStats slice_;
  PosteriorDraws draws_;
  std::vector<TraceRecord> trace_;
  std::size_t max_occupied_ = 0;
};

/// Convenience wrapper: construct, run, return the draws.
PosteriorDraws run_general(std::vector<double> series, const HyperpriorConfig& config,
                           const SamplerSettings& settings);

/// Initial labels from Lloyd's k-means on (z_{t-1}, z_t) pairs with k groups,
/// centers seeded at the x-quantiles. Deterministic.
std::vector<int> kmeans_pairs(std::span<const double> x, std::span<const double> y, std::size_t k);

}  // namespace dpmts
