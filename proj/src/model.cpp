#include "dpmts/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "dpmts/errors.hpp"
#include "dpmts/gaussian.hpp"
#include "dpmts/random.hpp"

namespace dpmts {

namespace {

void check_sticks(std::span<const double> zeta) {
  for (double z : zeta)
    if (!(z > 0.0 && z < 1.0)) throw DomainError("stick variables must lie in (0, 1)");
}

// log p_l + log N(z_prev | mu_x_l, delta_x_l) for every component.
std::vector<double> log_weight_kernels(double z_prev, const MixtureState& state) {
  const auto log_p = log_stick_break(state.zeta);
  std::vector<double> out(state.truncation());
  for (std::size_t l = 0; l < out.size(); ++l) {
    const auto& eta = state.components[l];
    out[l] = log_p[l] + log_normal_pdf(z_prev, eta.mu_x, eta.delta_x);
  }
  return out;
}

}  // namespace

void MixtureState::set_sticks(std::vector<double> sticks) {
  weights = stick_break(sticks);
  zeta = std::move(sticks);
}

void MixtureState::validate() const {
  if (components.empty()) throw DomainError("mixture needs at least one component");
  if (zeta.size() + 1 != components.size())
    throw DomainError("stick vector length must be L - 1");
  if (weights.size() != components.size()) throw DomainError("weight vector length must be L");
  check_sticks(zeta);
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be positive");
  for (const auto& eta : components) {
    if (!(eta.delta_x > 0.0) || !(eta.delta_y > 0.0))
      throw DomainError("component variances must be positive");
    if (!std::isfinite(eta.mu_x) || !std::isfinite(eta.mu_y) || !std::isfinite(eta.beta) ||
        !std::isfinite(eta.delta_x) || !std::isfinite(eta.delta_y))
      throw DomainError("component parameters must be finite");
  }
}

std::vector<double> stick_break(std::span<const double> zeta) {
  check_sticks(zeta);
  std::vector<double> p(zeta.size() + 1);
  double remaining = 1.0;
  for (std::size_t l = 0; l < zeta.size(); ++l) {
    p[l] = (1.0 - zeta[l]) * remaining;
    remaining *= zeta[l];
  }
  p.back() = remaining;
  return p;
}

std::vector<double> log_stick_break(std::span<const double> zeta) {
  check_sticks(zeta);
  std::vector<double> lp(zeta.size() + 1);
  double log_remaining = 0.0;
  for (std::size_t l = 0; l < zeta.size(); ++l) {
    lp[l] = std::log1p(-zeta[l]) + log_remaining;
    log_remaining += std::log(zeta[l]);
  }
  lp.back() = log_remaining;
  return lp;
}

std::vector<double> transition_weights(double z_prev, const MixtureState& state) {
  auto q = log_weight_kernels(z_prev, state);
  const double hi = *std::max_element(q.begin(), q.end());
  assert(std::isfinite(hi));
  double total = 0.0;
  for (double& v : q) {
    v = std::exp(v - hi);
    total += v;
  }
  for (double& v : q) v /= total;
  return q;
}

double log_transition_density(double z, double z_prev, const MixtureState& state) {
  auto weight_terms = log_weight_kernels(z_prev, state);
  std::vector<double> joint_terms(weight_terms.size());
  for (std::size_t l = 0; l < weight_terms.size(); ++l) {
    const auto& eta = state.components[l];
    const double mean = eta.mu_y - eta.beta * (z_prev - eta.mu_x);
    joint_terms[l] = weight_terms[l] + log_normal_pdf(z, mean, eta.delta_y);
  }
  return log_sum_exp(joint_terms) - log_sum_exp(weight_terms);
}

double transition_density(double z, double z_prev, const MixtureState& state) {
  return std::exp(log_transition_density(z, z_prev, state));
}

Covariance2 component_covariance(const ComponentParams& eta) {
  // Sigma = B^{-1} Delta B^{-T} with B = [[1, 0], [beta, 1]], so
  // B^{-1} = [[1, 0], [-beta, 1]].
  return {eta.delta_x, -eta.beta * eta.delta_x, eta.delta_y + eta.beta * eta.beta * eta.delta_x};
}

double transition_density_via_joint(double z, double z_prev, const MixtureState& state) {
  // f(y | x) = sum_l p_l N2((x, y) | mu_l, Sigma_l) / sum_l p_l N(x | mu_x_l, Sigma_xx_l)
  const std::size_t L = state.truncation();
  std::vector<double> joint(L), marginal(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& eta = state.components[l];
    const auto s = component_covariance(eta);
    const double det = s.xx * s.yy - s.yx * s.yx;
    if (!(s.xx > 0.0 && det > 0.0)) throw NumericalError("component covariance not positive definite");
    const double dx = z_prev - eta.mu_x;
    const double dy = z - eta.mu_y;
    const double quad = (s.yy * dx * dx - 2.0 * s.yx * dx * dy + s.xx * dy * dy) / det;
    const double log_p = std::log(state.weights[l]);
    joint[l] = log_p - kLogTwoPi - 0.5 * std::log(det) - 0.5 * quad;
    marginal[l] = log_p + log_normal_pdf(z_prev, eta.mu_x, s.xx);
  }
  return std::exp(log_sum_exp(joint) - log_sum_exp(marginal));
}

double conditional_expectation(double z_prev, const MixtureState& state) {
  const auto q = transition_weights(z_prev, state);
  double e = 0.0;
  for (std::size_t l = 0; l < q.size(); ++l) {
    const auto& eta = state.components[l];
    e += q[l] * (eta.mu_y - eta.beta * (z_prev - eta.mu_x));
  }
  return e;
}

double truncation_partial_sum(std::span<const double> alpha_draws, std::size_t truncation) {
  if (alpha_draws.empty()) throw DomainError("need at least one alpha draw");
  const double L = static_cast<double>(truncation);
  double acc = 0.0;
  for (double a : alpha_draws) acc += -std::expm1(L * std::log(a / (a + 1.0)));
  return acc / static_cast<double>(alpha_draws.size());
}

std::size_t choose_truncation(std::span<const double> alpha_draws, double tolerance) {
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw DomainError("tolerance must lie in (0, 1)");
  constexpr std::size_t kMaxTruncation = 100000;
  for (std::size_t L = 1; L <= kMaxTruncation; ++L)
    if (truncation_partial_sum(alpha_draws, L) >= 1.0 - tolerance) return L;
  throw NumericalError("no truncation level up to 100000 reaches the requested tolerance");
}

std::vector<double> draw_alpha_prior(double shape, double rate, std::size_t count,
                                     std::uint64_t seed) {
  if (!(shape > 0.0 && rate > 0.0)) throw DomainError("alpha prior needs positive shape and rate");
  Rng rng(seed);
  std::vector<double> draws(count);
  for (auto& a : draws) a = rng.gamma(shape, rate);
  return draws;
}

std::size_t choose_truncation(double alpha_shape, double alpha_rate, double tolerance,
                              std::size_t mc_draws, std::uint64_t seed) {
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw DomainError("tolerance must lie in (0, 1)");
  if (mc_draws < 10000) throw DomainError("choose_truncation needs at least 1e4 Monte Carlo draws");
  const auto draws = draw_alpha_prior(alpha_shape, alpha_rate, mc_draws, seed);
  return choose_truncation(draws, tolerance);
}

}  // namespace dpmts
