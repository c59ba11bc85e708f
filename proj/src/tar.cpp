#include "dpmts/tar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dpmts/errors.hpp"
#include "dpmts/gaussian.hpp"

namespace dpmts {

void TarPriors::validate() const {
  if (!(phi0_var > 0.0) || !(phi1_var > 0.0)) throw DomainError("TAR coefficient prior variances must be positive");
  if (!(tau_shape > 0.0) || !(tau_scale > 0.0)) throw DomainError("TAR variance prior must have positive shape and scale");
  if (!(r_lo < r_hi)) throw DomainError("TAR threshold support is empty");
}

TarPriors tar_default_priors(std::span<const double> series) {
  if (series.size() < 4) throw DomainError("series too short for TAR priors");
  TarPriors p;
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  const double n = static_cast<double>(series.size());
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  double var = 0.0;
  for (double z : series) var += (z - mean) * (z - mean);
  var /= n - 1.0;
  p.phi0_mean = 0.5 * (*lo + *hi);
  p.phi0_var = var;

  const std::size_t m = series.size() - 1;
  double mx = 0.0, my = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    mx += series[t];
    my += series[t + 1];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    sxx += (series[t] - mx) * (series[t] - mx);
    sxy += (series[t] - mx) * (series[t + 1] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  double rss = 0.0;
  for (std::size_t t = 0; t < m; ++t) {
    const double e = series[t + 1] - my - slope * (series[t] - mx);
    rss += e * e;
  }
  const double mse = rss / (static_cast<double>(m) - 2.0);
  p.tau_shape = 2.0;
  p.tau_scale = mse * (p.tau_shape - 1.0);

  std::vector<double> v(series.begin(), series.end());
  p.r_lo = quantile(v, 0.1);
  p.r_hi = quantile(v, 0.9);
  return p;
}

TarSampler::TarSampler(std::vector<double> series, TarPriors priors, SamplerSettings settings)
    : series_(std::move(series)), priors_(priors), settings_(settings), rng_(settings.seed) {
  if (series_.size() < 5) throw DomainError("TAR needs at least 5 observations");
  for (std::size_t i = 0; i < series_.size(); ++i)
    if (!std::isfinite(series_[i]))
      throw DomainError("series value " + std::to_string(i + 1) + " is not finite");
  priors_.validate();
  settings_.validate();
  x_.assign(series_.begin(), series_.end() - 1);
  y_.assign(series_.begin() + 1, series_.end());
  const auto [lo, hi] = std::minmax_element(series_.begin(), series_.end());
  scale_r_ = settings_.rw_scale_mu_x > 0.0 ? settings_.rw_scale_mu_x : 0.1 * (*hi - *lo) / 4.0;

  state_.r = quantile(x_, 0.5);
  state_.r = std::clamp(state_.r, priors_.r_lo, priors_.r_hi);
  if (regime_count(1, state_.r) < 2 || regime_count(2, state_.r) < 2)
    throw DomainError("no threshold in the prior support leaves both regimes populated");
  state_.phi0_1 = state_.phi0_2 = priors_.phi0_mean;
  state_.phi1_1 = state_.phi1_2 = priors_.phi1_mean;
  state_.tau_1 = state_.tau_2 = priors_.tau_shape > 1.0 ? priors_.tau_scale / (priors_.tau_shape - 1.0)
                                                          : priors_.tau_scale;

  fit_.meta.model = "tar";
  fit_.meta.n = series_.size();
  fit_.meta.truncation = 0;
  fit_.meta.seed = settings_.seed;
  fit_.meta.series_hash = series_fingerprint(series_);
  fit_.meta.settings = settings_;
  fit_.priors = priors_;
}

std::size_t TarSampler::regime_count(int regime, double r) const {
  const auto below = static_cast<std::size_t>(std::count_if(x_.begin(), x_.end(), [r](double x) { return x <= r; }));
  return regime == 1 ? below : x_.size() - below;
}

TarSampler::Coefficients TarSampler::coefficient_conditional(int regime) const {
  const double tau = regime == 1 ? state_.tau_1 : state_.tau_2;
  // precision = prior precision + X'X / tau
  double a = 1.0 / priors_.phi0_var, b = 0.0, d = 1.0 / priors_.phi1_var;
  double h0 = priors_.phi0_mean / priors_.phi0_var, h1 = priors_.phi1_mean / priors_.phi1_var;
  for (std::size_t t = 0; t < x_.size(); ++t) {
    if ((x_[t] <= state_.r) != (regime == 1)) continue;
    a += 1.0 / tau;
    b += x_[t] / tau;
    d += x_[t] * x_[t] / tau;
    h0 += y_[t] / tau;
    h1 += x_[t] * y_[t] / tau;
  }
  const double det = a * d - b * b;
  Coefficients out;
  out.cov[0][0] = d / det;
  out.cov[0][1] = out.cov[1][0] = -b / det;
  out.cov[1][1] = a / det;
  out.mean[0] = out.cov[0][0] * h0 + out.cov[0][1] * h1;
  out.mean[1] = out.cov[1][0] * h0 + out.cov[1][1] * h1;
  return out;
}

InvGammaParams TarSampler::tau_conditional(int regime) const {
  const double phi0 = regime == 1 ? state_.phi0_1 : state_.phi0_2;
  const double phi1 = regime == 1 ? state_.phi1_1 : state_.phi1_2;
  double ss = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < x_.size(); ++t) {
    if ((x_[t] <= state_.r) != (regime == 1)) continue;
    const double e = y_[t] - phi0 - phi1 * x_[t];
    ss += e * e;
    ++count;
  }
  return {priors_.tau_shape + 0.5 * static_cast<double>(count), priors_.tau_scale + 0.5 * ss};
}

double TarSampler::log_likelihood(double r) const {
  double ll = 0.0;
  for (std::size_t t = 0; t < x_.size(); ++t) {
    if (x_[t] <= r)
      ll += log_normal_pdf(y_[t], state_.phi0_1 + state_.phi1_1 * x_[t], state_.tau_1);
    else
      ll += log_normal_pdf(y_[t], state_.phi0_2 + state_.phi1_2 * x_[t], state_.tau_2);
  }
  return ll;
}

void TarSampler::sweep() {
  for (int k : {1, 2}) {
    const auto c = coefficient_conditional(k);
    const double l00 = std::sqrt(c.cov[0][0]);
    const double l10 = c.cov[1][0] / l00;
    const double l11 = std::sqrt(std::max(c.cov[1][1] - l10 * l10, 0.0));
    const double e0 = rng_.standard_normal(), e1 = rng_.standard_normal();
    const double phi0 = c.mean[0] + l00 * e0;
    const double phi1 = c.mean[1] + l10 * e0 + l11 * e1;
    (k == 1 ? state_.phi0_1 : state_.phi0_2) = phi0;
    (k == 1 ? state_.phi1_1 : state_.phi1_2) = phi1;
    const auto g = tau_conditional(k);
    (k == 1 ? state_.tau_1 : state_.tau_2) = rng_.inverse_gamma(g.shape, g.scale);
  }

  const double proposal = state_.r + scale_r_ * rng_.standard_normal();
  double log_ratio = -std::numeric_limits<double>::infinity();
  if (proposal >= priors_.r_lo && proposal <= priors_.r_hi && regime_count(1, proposal) >= 2 &&
      regime_count(2, proposal) >= 2)
    log_ratio = log_likelihood(proposal) - log_likelihood(state_.r);
  const bool accept = std::log(rng_.uniform()) < log_ratio;
  if (accept) state_.r = proposal;
  ++proposed_;
  if (accept) ++accepted_;
  if (settings_.adapt && iteration_ < settings_.burn_in) {
    const double prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
    scale_r_ *= std::exp(std::pow(static_cast<double>(proposed_) + 1.0, -0.6) * (prob - 0.3));
  }
  ++iteration_;
}

const TarFit& TarSampler::run() {
  while (iteration_ < settings_.n_iterations) {
    sweep();
    if (iteration_ <= settings_.burn_in || (iteration_ - settings_.burn_in) % settings_.thin != 0) continue;
    fit_.iterations.push_back(iteration_);
    fit_.draws.push_back(state_);
  }
  fit_.threshold_acceptance = proposed_ ? static_cast<double>(accepted_) / static_cast<double>(proposed_) : 0.0;
  return fit_;
}

TarFit fit_tar(std::vector<double> series, const TarPriors& priors, const SamplerSettings& settings) {
  TarSampler sampler(std::move(series), priors, settings);
  return sampler.run();
}

ConditionalMixture TarDraws::conditional(std::size_t draw, double z_prev) const {
  const auto& p = draws_[draw];
  const bool low = z_prev <= p.r;
  ConditionalMixture m;
  m.log_weights = {0.0};
  m.means = {low ? p.phi0_1 + p.phi1_1 * z_prev : p.phi0_2 + p.phi1_2 * z_prev};
  m.variances = {low ? p.tau_1 : p.tau_2};
  return m;
}

}  // namespace dpmts
