#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dpmts {

/// One atom of the truncated Dirichlet process.
///
/// The bivariate normal kernel is stored through its square-root-free Cholesky
/// factors: the weight kernel N(x | mu_x, delta_x) and the conditional response
/// N(y | mu_y - beta (x - mu_x), delta_y). Variances, not standard deviations.
struct ComponentParams {
  double mu_x = 0.0;
  double mu_y = 0.0;
  double beta = 0.0;
  double delta_x = 1.0;
  double delta_y = 1.0;

  bool operator==(const ComponentParams&) const = default;
};

/// Hyperparameters of the base distribution G0, plus its fixed shapes.
struct Hyperparams {
  double m_x = 0.0, v_x = 1.0;
  double m_y = 0.0, v_y = 1.0;
  double s_x = 1.0, s_y = 1.0;
  double theta = 0.0, c = 1.0;
  double nu_x = 2.0, nu_y = 2.0;

  bool operator==(const Hyperparams&) const = default;
};

/// Truncated DP mixture: L components, L-1 stick variables zeta ~ beta(alpha, 1)
/// and the weights they imply. `weights` is kept consistent with `zeta` by
/// set_sticks(); code that edits zeta directly must call it.
struct MixtureState {
  std::vector<ComponentParams> components;
  std::vector<double> zeta;
  std::vector<double> weights;
  double alpha = 1.0;
  Hyperparams psi;

  std::size_t truncation() const { return components.size(); }
  void set_sticks(std::vector<double> sticks);
  /// Throws DomainError when an invariant is broken.
  void validate() const;

  bool operator==(const MixtureState&) const = default;
};

/// Stick-breaking map: p_1 = 1 - zeta_1, p_l = (1 - zeta_l) prod_{r<l} zeta_r,
/// p_L = prod_{r<L} zeta_r. Throws DomainError unless every zeta is in (0, 1).
std::vector<double> stick_break(std::span<const double> zeta);

/// Log of the stick-breaking weights, computed from sums of logs so that
/// deep components never underflow to -inf.
std::vector<double> log_stick_break(std::span<const double> zeta);

/// Normalized weights q_l(z_prev) ∝ p_l N(z_prev | mu_x_l, delta_x_l).
std::vector<double> transition_weights(double z_prev, const MixtureState& state);

/// Mixture transition density f(z | z_prev).
double transition_density(double z, double z_prev, const MixtureState& state);
double log_transition_density(double z, double z_prev, const MixtureState& state);

/// Same density evaluated as the conditional of the joint bivariate normal
/// mixture, with each covariance rebuilt from (beta, delta_x, delta_y).
/// Independent route used to cross-check the reparametrized form.
double transition_density_via_joint(double z, double z_prev, const MixtureState& state);

/// 2x2 covariance {Sxx, Syx, Syy} implied by a component's Cholesky factors.
struct Covariance2 {
  double xx, yx, yy;
};
Covariance2 component_covariance(const ComponentParams& eta);

/// E(Z_t | Z_{t-1} = z_prev): weighted mixture of the component regression lines.
double conditional_expectation(double z_prev, const MixtureState& state);

/// Prior expectation of the first L original DP weights, averaged over the
/// supplied draws of alpha: mean of 1 - (alpha / (alpha + 1))^L.
double truncation_partial_sum(std::span<const double> alpha_draws, std::size_t truncation);

/// Smallest L whose averaged partial sum reaches 1 - tolerance.
std::size_t choose_truncation(std::span<const double> alpha_draws, double tolerance);

/// Monte Carlo version over alpha ~ Gamma(shape, rate), seeded.
std::size_t choose_truncation(double alpha_shape, double alpha_rate, double tolerance,
                              std::size_t mc_draws = 100000, std::uint64_t seed = 20160101);

/// Draws alpha ~ Gamma(shape, rate) for the truncation helpers.
std::vector<double> draw_alpha_prior(double shape, double rate, std::size_t count,
                                     std::uint64_t seed);

}  // namespace dpmts
