#include "dpmts/sampler.hpp"

#include <algorithm>
#include <cstring>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "dpmts/errors.hpp"
#include "dpmts/gaussian.hpp"

namespace dpmts {

namespace {

constexpr double kTargetAcceptance = 0.3;

void validate_series(std::span<const double> series) {
  if (series.size() < 3) throw DomainError("series needs at least 3 observations");
  for (std::size_t i = 0; i < series.size(); ++i)
    if (!std::isfinite(series[i]))
      throw DomainError("series value " + std::to_string(i + 1) + " is not finite");
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v) {
  const double m = mean_of(v);
  double ss = 0.0;
  for (double a : v) ss += (a - m) * (a - m);
  return ss / static_cast<double>(v.size());
}

double log_inverse_gamma_kernel(double x, double shape, double scale) {
  return -(shape + 1.0) * std::log(x) - scale / x;
}

}  // namespace

void SamplerSettings::validate() const {
  if (thin < 1) throw DomainError("thin must be at least 1");
  if (!(burn_in < n_iterations)) throw DomainError("burn_in must be smaller than n_iterations");
  if (rw_scale_mu_x < 0.0 || rw_scale_log_delta_x < 0.0)
    throw DomainError("random-walk scales must be non-negative");
}

std::uint64_t series_fingerprint(std::span<const double> series) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (double v : series) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

std::vector<int> kmeans_pairs(std::span<const double> x, std::span<const double> y, std::size_t k) {
  const std::size_t n = x.size();
  k = std::max<std::size_t>(1, std::min(k, n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> cx(k), cy(k);
  for (std::size_t j = 0; j < k; ++j) {
    const auto idx = order[std::min(n - 1, (2 * j + 1) * n / (2 * k))];
    cx[j] = x[idx];
    cy[j] = y[idx];
  }
  std::vector<int> labels(n, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t t = 0; t < n; ++t) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double d = (x[t] - cx[j]) * (x[t] - cx[j]) + (y[t] - cy[j]) * (y[t] - cy[j]);
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      if (labels[t] != static_cast<int>(best)) {
        labels[t] = static_cast<int>(best);
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<double> sx(k, 0.0), sy(k, 0.0);
    std::vector<std::size_t> cnt(k, 0);
    for (std::size_t t = 0; t < n; ++t) {
      const auto j = static_cast<std::size_t>(labels[t]);
      sx[j] += x[t];
      sy[j] += y[t];
      ++cnt[j];
    }
    for (std::size_t j = 0; j < k; ++j)
      if (cnt[j]) {
        cx[j] = sx[j] / static_cast<double>(cnt[j]);
        cy[j] = sy[j] / static_cast<double>(cnt[j]);
      }
  }
  return labels;
}

GeneralSampler::GeneralSampler(std::vector<double> series, HyperpriorConfig config,
                               SamplerSettings settings)
    : GeneralSampler(std::move(series), config, settings, ChainState{}) {}

GeneralSampler::GeneralSampler(std::vector<double> series, HyperpriorConfig config,
                               SamplerSettings settings, ChainState state)
    : series_(std::move(series)), config_(config), settings_(settings) {
  validate_series(series_);
  config_.validate();
  settings_.validate();
  x_.assign(series_.begin(), series_.end() - 1);
  y_.assign(series_.begin() + 1, series_.end());
  const auto [lo, hi] = std::minmax_element(series_.begin(), series_.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) throw DomainError("series is constant");
  const std::size_t L = config_.truncation;
  scale_mu_x_.assign(L, settings_.rw_scale_mu_x > 0.0 ? settings_.rw_scale_mu_x : 0.1 * range / 4.0);
  scale_log_delta_x_.assign(L, settings_.rw_scale_log_delta_x > 0.0 ? settings_.rw_scale_log_delta_x : 0.3);
  moves_mu_x_.resize(L);
  moves_delta_x_.resize(L);
  window_mu_x_.resize(L);
  window_delta_x_.resize(L);

  draws_.meta.model = "general";
  draws_.meta.n = series_.size();
  draws_.meta.truncation = L;
  draws_.meta.seed = settings_.seed;
  draws_.meta.series_hash = series_fingerprint(series_);
  draws_.meta.settings = settings_;

  if (state.mixture.components.empty()) {
    initialize();
  } else {
    state_ = std::move(state);
    state_.mixture.validate();
    if (state_.mixture.truncation() != L)
      throw DomainError("state truncation does not match the configuration");
    if (state_.labels.size() != x_.size()) throw DomainError("label count must be n - 1");
    for (int u : state_.labels)
      if (u < 0 || static_cast<std::size_t>(u) >= L) throw DomainError("label out of range");
    refresh();
  }
}

void GeneralSampler::initialize() {
  const std::size_t L = config_.truncation;
  auto& mix = state_.mixture;
  state_.rng = Rng(settings_.seed);
  state_.iteration = 0;

  auto& psi = mix.psi;
  psi.m_x = config_.a_m_x;
  psi.m_y = config_.a_m_y;
  psi.v_x = config_.a_v_x > 1.0 ? config_.b_v_x / (config_.a_v_x - 1.0) : config_.b_v_x;
  psi.v_y = config_.a_v_y > 1.0 ? config_.b_v_y / (config_.a_v_y - 1.0) : config_.b_v_y;
  psi.s_x = config_.a_s_x / config_.b_s_x;
  psi.s_y = config_.a_s_y / config_.b_s_y;
  psi.theta = config_.a_theta;
  psi.c = config_.b_c / (config_.a_c - 1.0);
  psi.nu_x = config_.nu_x;
  psi.nu_y = config_.nu_y;
  mix.alpha = config_.a_alpha / config_.b_alpha;

  const std::size_t groups = std::min<std::size_t>({5, L, x_.size()});
  state_.labels = kmeans_pairs(x_, y_, groups);
  const double floor = 1e-6 * variance_of(series_);
  mix.components.assign(L, ComponentParams{});
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<double> gx, gy;
    for (std::size_t t = 0; t < x_.size(); ++t)
      if (state_.labels[t] == static_cast<int>(g)) {
        gx.push_back(x_[t]);
        gy.push_back(y_[t]);
      }
    if (gx.empty()) {
      gx = x_;
      gy = y_;
    }
    auto& eta = mix.components[g];
    eta.mu_x = mean_of(gx);
    eta.mu_y = mean_of(gy);
    eta.beta = 0.0;
    eta.delta_x = std::max(variance_of(gx), floor);
    eta.delta_y = std::max(variance_of(gy), floor);
  }
  auto& rng = state_.rng;
  for (std::size_t l = groups; l < L; ++l) {
    auto& eta = mix.components[l];
    eta.mu_x = rng.normal(psi.m_x, psi.v_x);
    eta.mu_y = rng.normal(psi.m_y, psi.v_y);
    eta.beta = rng.normal(psi.theta, psi.c);
    eta.delta_x = rng.inverse_gamma(psi.nu_x, psi.s_x);
    eta.delta_y = rng.inverse_gamma(psi.nu_y, psi.s_y);
  }
  const double z0 = std::clamp(mix.alpha / (mix.alpha + 1.0), 1e-6, 1.0 - 1e-6);
  mix.set_sticks(std::vector<double>(L - 1, z0));
  refresh();

  const double ll = log_likelihood();
  if (!std::isfinite(ll)) {
    std::ostringstream msg;
    msg << "initialization produced a non-finite log-likelihood (" << ll << "); "
        << "log D = " << log_weight_normalizer() << ", groups = " << groups;
    throw NumericalError(msg.str());
  }
}

void GeneralSampler::refresh() {
  rebuild_members();
  rebuild_cache();
}

void GeneralSampler::rebuild_members() {
  const std::size_t L = config_.truncation;
  counts_ = occupancy(state_.labels, L);
  members_.assign(L, {});
  for (std::size_t l = 0; l < L; ++l) members_[l].reserve(counts_[l]);
  for (std::size_t t = 0; t < state_.labels.size(); ++t)
    members_[static_cast<std::size_t>(state_.labels[t])].push_back(t);
}

void GeneralSampler::rebuild_cache() {
  const auto& comps = state_.mixture.components;
  std::vector<double> mu(comps.size()), var(comps.size());
  for (std::size_t l = 0; l < comps.size(); ++l) {
    mu[l] = comps[l].mu_x;
    var[l] = comps[l].delta_x;
  }
  cache_ = WeightKernelCache(x_, mu, var, log_stick_break(state_.mixture.zeta));
}

std::size_t GeneralSampler::occupied() const {
  return static_cast<std::size_t>(std::count_if(counts_.begin(), counts_.end(), [](auto c) { return c > 0; }));
}

double GeneralSampler::log_likelihood() const {
  const auto& mix = state_.mixture;
  const auto log_p = log_stick_break(mix.zeta);
  const std::size_t L = mix.truncation();
  std::vector<double> terms(L);
  double ll = 0.0;
  for (std::size_t t = 0; t < x_.size(); ++t) {
    for (std::size_t l = 0; l < L; ++l) {
      const auto& eta = mix.components[l];
      terms[l] = log_p[l] + cache_.log_kernel(t, l) +
                 log_normal_pdf(y_[t], eta.mu_y - eta.beta * (x_[t] - eta.mu_x), eta.delta_y);
    }
    ll += log_sum_exp(terms) - cache_.log_normalizer(t);
  }
  return ll;
}

void GeneralSampler::sweep() {
  update_labels();
  update_mu_y();
  update_delta_y();
  update_beta();
  update_mu_x();
  update_delta_x();
  update_sticks();
  update_alpha();
  update_hyperparams();
  ++state_.iteration;
}

void GeneralSampler::update_labels() {
  const auto& mix = state_.mixture;
  const std::size_t L = mix.truncation();
  const auto log_p = log_stick_break(mix.zeta);
  std::vector<double> norm(L), inv(L), scores(L);
  for (std::size_t l = 0; l < L; ++l) {
    norm[l] = -0.5 * (kLogTwoPi + std::log(mix.components[l].delta_y));
    inv[l] = 1.0 / mix.components[l].delta_y;
  }
  for (std::size_t t = 0; t < x_.size(); ++t) {
    for (std::size_t l = 0; l < L; ++l) {
      const auto& eta = mix.components[l];
      const double r = y_[t] - eta.mu_y + eta.beta * (x_[t] - eta.mu_x);
      scores[l] = log_p[l] + cache_.log_kernel(t, l) + norm[l] - 0.5 * r * r * inv[l];
    }
    state_.labels[t] = static_cast<int>(state_.rng.categorical_log(scores));
  }
  rebuild_members();
  max_occupied_ = std::max(max_occupied_, occupied());
}

NormalParams GeneralSampler::mu_y_conditional(std::size_t l) const {
  const auto& eta = state_.mixture.components[l];
  const auto& psi = state_.mixture.psi;
  double s = 0.0;
  for (auto t : members_[l]) s += y_[t] + eta.beta * (x_[t] - eta.mu_x);
  const double var = 1.0 / (1.0 / psi.v_y + static_cast<double>(counts_[l]) / eta.delta_y);
  return {var * (psi.m_y / psi.v_y + s / eta.delta_y), var};
}

InvGammaParams GeneralSampler::delta_y_conditional(std::size_t l) const {
  const auto& eta = state_.mixture.components[l];
  const auto& psi = state_.mixture.psi;
  double ss = 0.0;
  for (auto t : members_[l]) {
    const double r = y_[t] - eta.mu_y + eta.beta * (x_[t] - eta.mu_x);
    ss += r * r;
  }
  return {psi.nu_y + 0.5 * static_cast<double>(counts_[l]), psi.s_y + 0.5 * ss};
}

NormalParams GeneralSampler::beta_conditional(std::size_t l) const {
  const auto& eta = state_.mixture.components[l];
  const auto& psi = state_.mixture.psi;
  double sxx = 0.0, sxy = 0.0;
  for (auto t : members_[l]) {
    const double dx = x_[t] - eta.mu_x;
    sxx += dx * dx;
    sxy += dx * (eta.mu_y - y_[t]);
  }
  const double var = 1.0 / (1.0 / psi.c + sxx / eta.delta_y);
  return {var * (psi.theta / psi.c + sxy / eta.delta_y), var};
}

NormalParams GeneralSampler::mu_x_gaussian_factor(std::size_t l) const {
  const auto& eta = state_.mixture.components[l];
  const auto& psi = state_.mixture.psi;
  const double M = static_cast<double>(counts_[l]);
  double sx = 0.0, sr = 0.0;
  for (auto t : members_[l]) {
    sx += x_[t];
    sr += eta.beta * x_[t] + y_[t] - eta.mu_y;
  }
  const double prec = 1.0 / psi.v_x + M / eta.delta_x + M * eta.beta * eta.beta / eta.delta_y;
  const double var = 1.0 / prec;
  return {var * (psi.m_x / psi.v_x + sx / eta.delta_x + eta.beta * sr / eta.delta_y), var};
}

InvGammaParams GeneralSampler::delta_x_ig_factor(std::size_t l) const {
  const auto& eta = state_.mixture.components[l];
  const auto& psi = state_.mixture.psi;
  double ss = 0.0;
  for (auto t : members_[l]) ss += (x_[t] - eta.mu_x) * (x_[t] - eta.mu_x);
  return {psi.nu_x + 0.5 * static_cast<double>(counts_[l]), psi.s_x + 0.5 * ss};
}

void GeneralSampler::update_mu_y() {
  auto& mix = state_.mixture;
  for (std::size_t l = 0; l < mix.truncation(); ++l) {
    if (counts_[l] > 0) {
      const auto p = mu_y_conditional(l);
      mix.components[l].mu_y = state_.rng.normal(p.mean, p.variance);
    } else {
      mix.components[l].mu_y = state_.rng.normal(mix.psi.m_y, mix.psi.v_y);
    }
  }
}

void GeneralSampler::update_delta_y() {
  auto& mix = state_.mixture;
  for (std::size_t l = 0; l < mix.truncation(); ++l) {
    const auto p = counts_[l] > 0 ? delta_y_conditional(l) : InvGammaParams{mix.psi.nu_y, mix.psi.s_y};
    mix.components[l].delta_y = state_.rng.inverse_gamma(p.shape, p.scale);
  }
}

void GeneralSampler::update_beta() {
  auto& mix = state_.mixture;
  for (std::size_t l = 0; l < mix.truncation(); ++l) {
    const auto p = counts_[l] > 0 ? beta_conditional(l) : NormalParams{mix.psi.theta, mix.psi.c};
    mix.components[l].beta = state_.rng.normal(p.mean, p.variance);
  }
}

double GeneralSampler::adapt_step(std::size_t attempts) const {
  return std::pow(static_cast<double>(attempts) + 1.0, -0.6);
}

void GeneralSampler::update_mu_x() {
  auto& mix = state_.mixture;
  auto& rng = state_.rng;
  const bool adapting = settings_.adapt && state_.iteration < settings_.burn_in;
  for (std::size_t l = 0; l < mix.truncation(); ++l) {
    auto& eta = mix.components[l];
    double log_ratio, proposal;
    if (counts_[l] > 0) {
      const auto g = mu_x_gaussian_factor(l);
      proposal = eta.mu_x + scale_mu_x_[l] * rng.standard_normal();
      const double d_log_d = cache_.propose(l, proposal, eta.delta_x);
      log_ratio = log_normal_pdf(proposal, g.mean, g.variance) -
                  log_normal_pdf(eta.mu_x, g.mean, g.variance) - d_log_d;
    } else {
      proposal = rng.normal(mix.psi.m_x, mix.psi.v_x);
      log_ratio = -cache_.propose(l, proposal, eta.delta_x);
    }
    const bool accept = std::log(rng.uniform()) < log_ratio;
    if (accept) {
      eta.mu_x = proposal;
      cache_.accept();
    }
    if (counts_[l] > 0) {
      ++moves_mu_x_.proposed[l];
      ++window_mu_x_.proposed[l];
      if (accept) {
        ++moves_mu_x_.accepted[l];
        ++window_mu_x_.accepted[l];
      }
      if (adapting) {
        const double prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
        scale_mu_x_[l] *= std::exp(adapt_step(moves_mu_x_.proposed[l]) * (prob - kTargetAcceptance));
      }
    }
  }
}

void GeneralSampler::update_delta_x() {
  auto& mix = state_.mixture;
  auto& rng = state_.rng;
  const bool adapting = settings_.adapt && state_.iteration < settings_.burn_in;
  for (std::size_t l = 0; l < mix.truncation(); ++l) {
    auto& eta = mix.components[l];
    double log_ratio, proposal;
    if (counts_[l] > 0) {
      const auto f = delta_x_ig_factor(l);
      proposal = eta.delta_x * std::exp(scale_log_delta_x_[l] * rng.standard_normal());
      const double d_log_d = cache_.propose(l, eta.mu_x, proposal);
      // target on the log scale includes the Jacobian delta
      log_ratio = log_inverse_gamma_kernel(proposal, f.shape, f.scale) + std::log(proposal) -
                  log_inverse_gamma_kernel(eta.delta_x, f.shape, f.scale) - std::log(eta.delta_x) -
                  d_log_d;
    } else {
      proposal = rng.inverse_gamma(mix.psi.nu_x, mix.psi.s_x);
      log_ratio = -cache_.propose(l, eta.mu_x, proposal);
    }
    const bool accept = std::log(rng.uniform()) < log_ratio;
    if (accept) {
      eta.delta_x = proposal;
      cache_.accept();
    }
    if (counts_[l] > 0) {
      ++moves_delta_x_.proposed[l];
      ++window_delta_x_.proposed[l];
      if (accept) {
        ++moves_delta_x_.accepted[l];
        ++window_delta_x_.accepted[l];
      }
      if (adapting) {
        const double prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
        scale_log_delta_x_[l] *=
            std::exp(adapt_step(moves_delta_x_.proposed[l]) * (prob - kTargetAcceptance));
      }
    }
  }
}

double GeneralSampler::empty_mu_x_log_ratio(std::size_t l, double proposal) {
  return -cache_.propose(l, proposal, state_.mixture.components[l].delta_x);
}

void GeneralSampler::update_sticks() {
  auto& mix = state_.mixture;
  if (mix.truncation() < 2) return;
  std::vector<double> zeta = mix.zeta;
  update_sticks_slice(zeta, mix.alpha, counts_, cache_.log_kernels(), state_.rng, slice_);
  mix.set_sticks(std::move(zeta));
  cache_.reweight(log_stick_break(mix.zeta));
}

GammaParams GeneralSampler::alpha_conditional() const {
  return dpmts::alpha_conditional(config_.a_alpha, config_.b_alpha, state_.mixture.zeta);
}

void GeneralSampler::update_alpha() {
  const auto g = alpha_conditional();
  state_.mixture.alpha = state_.rng.gamma(g.shape, g.rate);
}

namespace {

template <class Get>
NormalParams normal_mean_conditional(const std::vector<ComponentParams>& comps, Get get,
                                     double prior_mean, double prior_var, double var) {
  double s = 0.0;
  for (const auto& eta : comps) s += get(eta);
  const double post = 1.0 / (1.0 / prior_var + static_cast<double>(comps.size()) / var);
  return {post * (prior_mean / prior_var + s / var), post};
}

template <class Get>
InvGammaParams normal_variance_conditional(const std::vector<ComponentParams>& comps, Get get,
                                           double mean, double shape, double scale) {
  double ss = 0.0;
  for (const auto& eta : comps) ss += (get(eta) - mean) * (get(eta) - mean);
  return {shape + 0.5 * static_cast<double>(comps.size()), scale + 0.5 * ss};
}

template <class Get>
GammaParams ig_scale_conditional(const std::vector<ComponentParams>& comps, Get get, double nu,
                                 double shape, double rate) {
  double inv = 0.0;
  for (const auto& eta : comps) inv += 1.0 / get(eta);
  return {shape + static_cast<double>(comps.size()) * nu, rate + inv};
}

}  // namespace

NormalParams GeneralSampler::m_x_conditional() const {
  const auto& mix = state_.mixture;
  return normal_mean_conditional(mix.components, [](auto& e) { return e.mu_x; }, config_.a_m_x,
                                 config_.b_m_x, mix.psi.v_x);
}
InvGammaParams GeneralSampler::v_x_conditional() const {
  const auto& mix = state_.mixture;
  return normal_variance_conditional(mix.components, [](auto& e) { return e.mu_x; }, mix.psi.m_x,
                                     config_.a_v_x, config_.b_v_x);
}
NormalParams GeneralSampler::m_y_conditional() const {
  const auto& mix = state_.mixture;
  return normal_mean_conditional(mix.components, [](auto& e) { return e.mu_y; }, config_.a_m_y,
                                 config_.b_m_y, mix.psi.v_y);
}
InvGammaParams GeneralSampler::v_y_conditional() const {
  const auto& mix = state_.mixture;
  return normal_variance_conditional(mix.components, [](auto& e) { return e.mu_y; }, mix.psi.m_y,
                                     config_.a_v_y, config_.b_v_y);
}
GammaParams GeneralSampler::s_x_conditional() const {
  const auto& mix = state_.mixture;
  return ig_scale_conditional(mix.components, [](auto& e) { return e.delta_x; }, mix.psi.nu_x,
                              config_.a_s_x, config_.b_s_x);
}
GammaParams GeneralSampler::s_y_conditional() const {
  const auto& mix = state_.mixture;
  return ig_scale_conditional(mix.components, [](auto& e) { return e.delta_y; }, mix.psi.nu_y,
                              config_.a_s_y, config_.b_s_y);
}
NormalParams GeneralSampler::theta_conditional() const {
  const auto& mix = state_.mixture;
  return normal_mean_conditional(mix.components, [](auto& e) { return e.beta; }, config_.a_theta,
                                 config_.b_theta, mix.psi.c);
}
InvGammaParams GeneralSampler::c_conditional() const {
  const auto& mix = state_.mixture;
  return normal_variance_conditional(mix.components, [](auto& e) { return e.beta; }, mix.psi.theta,
                                     config_.a_c, config_.b_c);
}

void GeneralSampler::update_hyperparams() {
  auto& psi = state_.mixture.psi;
  auto& rng = state_.rng;
  auto draw_normal = [&](NormalParams p) { return rng.normal(p.mean, p.variance); };
  auto draw_ig = [&](InvGammaParams p) { return rng.inverse_gamma(p.shape, p.scale); };
  auto draw_gamma = [&](GammaParams p) { return rng.gamma(p.shape, p.rate); };
  psi.m_x = draw_normal(m_x_conditional());
  psi.v_x = draw_ig(v_x_conditional());
  psi.m_y = draw_normal(m_y_conditional());
  psi.v_y = draw_ig(v_y_conditional());
  psi.s_x = draw_gamma(s_x_conditional());
  psi.s_y = draw_gamma(s_y_conditional());
  psi.theta = draw_normal(theta_conditional());
  psi.c = draw_ig(c_conditional());
}

const PosteriorDraws& GeneralSampler::run(const std::function<void(const TraceRecord&)>& on_trace) {
  while (state_.iteration < settings_.n_iterations) {
    sweep();
    const std::size_t it = state_.iteration;
    if (it <= settings_.burn_in || (it - settings_.burn_in) % settings_.thin != 0) continue;
    draws_.iterations.push_back(it);
    draws_.draws.push_back(state_.mixture);

    TraceRecord rec;
    rec.iteration = it;
    rec.occupied = occupied();
    rec.alpha = state_.mixture.alpha;
    rec.log_likelihood = log_likelihood();
    auto pooled = [](const MoveStats& w) {
      const auto p = std::accumulate(w.proposed.begin(), w.proposed.end(), std::uint64_t{0});
      const auto a = std::accumulate(w.accepted.begin(), w.accepted.end(), std::uint64_t{0});
      return p ? static_cast<double>(a) / static_cast<double>(p) : 0.0;
    };
    rec.accept_mu_x = pooled(window_mu_x_);
    rec.accept_log_delta_x = pooled(window_delta_x_);
    rec.slice_violations = slice_.violations;
    window_mu_x_.resize(config_.truncation);
    window_delta_x_.resize(config_.truncation);
    trace_.push_back(rec);
    if (on_trace) on_trace(rec);
  }
  return draws_;
}

Checkpoint GeneralSampler::checkpoint() const {
  Checkpoint cp;
  cp.model = "general";
  cp.series = series_;
  cp.config = config_;
  cp.settings = settings_;
  cp.chain = state_;
  cp.scale_mu_x = scale_mu_x_;
  cp.scale_log_delta_x = scale_log_delta_x_;
  cp.moves_mu_x = moves_mu_x_;
  cp.moves_delta_x = moves_delta_x_;
  cp.window_mu_x = window_mu_x_;
  cp.window_delta_x = window_delta_x_;
  cp.max_occupied = max_occupied_;
  cp.slice = slice_;
  cp.draws = draws_;
  cp.trace = trace_;
  return cp;
}

GeneralSampler GeneralSampler::resume(const Checkpoint& cp) {
  if (cp.model != "general") throw ValidationError("checkpoint is for model '" + cp.model + "'");
  GeneralSampler s(cp.series, cp.config, cp.settings, cp.chain);
  s.scale_mu_x_ = cp.scale_mu_x;
  s.scale_log_delta_x_ = cp.scale_log_delta_x;
  s.moves_mu_x_ = cp.moves_mu_x;
  s.moves_delta_x_ = cp.moves_delta_x;
  s.window_mu_x_ = cp.window_mu_x;
  s.window_delta_x_ = cp.window_delta_x;
  s.max_occupied_ = cp.max_occupied;
  s.slice_ = cp.slice;
  s.draws_ = cp.draws;
  s.draws_.meta.settings = cp.settings;
  s.trace_ = cp.trace;
  return s;
}

PosteriorDraws run_general(std::vector<double> series, const HyperpriorConfig& config,
                           const SamplerSettings& settings) {
  GeneralSampler sampler(std::move(series), config, settings);
  return sampler.run();
}

}  // namespace dpmts
