#include "dpmts/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "dpmts/errors.hpp"
#include "dpmts/gaussian.hpp"

namespace dpmts {

namespace {

constexpr double kTargetAcceptance = 0.3;

void check_component(const StationaryComponent& c) {
  if (!(std::abs(c.beta) < 1.0)) throw DomainError("stationary component needs |beta| < 1");
  if (!(c.sigma2 > 0.0) || !std::isfinite(c.sigma2) || !std::isfinite(c.mu))
    throw DomainError("stationary component needs finite mu and sigma2 > 0");
}

double response_variance(const StationaryComponent& c) { return c.sigma2 * (1.0 - c.beta * c.beta); }

double response_mean(const StationaryComponent& c, double x) { return c.mu - c.beta * (x - c.mu); }

double log_ig_kernel(double x, double shape, double scale) {
  return -(shape + 1.0) * std::log(x) - scale / x;
}

double sample_truncated_beta_prior(double theta, double c, Rng& rng) {
  const double sd = std::sqrt(c);
  if (beta_prior_mass(theta, c) > 1e-3) {
    for (;;) {
      const double b = rng.normal(theta, c);
      if (b > -1.0 && b < 1.0) return b;
    }
  }
  const boost::math::normal_distribution<double> n(theta, sd);
  const double lo = boost::math::cdf(n, -1.0), hi = boost::math::cdf(n, 1.0);
  const double b = boost::math::quantile(n, lo + rng.uniform() * (hi - lo));
  return std::clamp(b, std::nextafter(-1.0, 0.0), std::nextafter(1.0, 0.0));
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

double pooled_rate(const MoveStats& w) {
  const auto p = std::accumulate(w.proposed.begin(), w.proposed.end(), std::uint64_t{0});
  const auto a = std::accumulate(w.accepted.begin(), w.accepted.end(), std::uint64_t{0});
  return p ? static_cast<double>(a) / static_cast<double>(p) : 0.0;
}

void record(MoveStats& total, MoveStats* window, std::size_t l, bool accepted) {
  ++total.proposed[l];
  if (accepted) ++total.accepted[l];
  if (window) {
    ++window->proposed[l];
    if (accepted) ++window->accepted[l];
  }
}

}  // namespace

void StationaryState::set_sticks(std::vector<double> sticks) {
  weights = stick_break(sticks);
  zeta = std::move(sticks);
}

void StationaryState::validate() const {
  if (components.empty()) throw DomainError("mixture needs at least one component");
  if (zeta.size() + 1 != components.size()) throw DomainError("stick vector length must be L - 1");
  if (weights.size() != components.size()) throw DomainError("weight vector length must be L");
  for (const auto& c : components) check_component(c);
  stick_break(zeta);
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
}

double stationary_transition_density(double z, double z_prev, const StationaryState& state) {
  for (const auto& c : state.components) check_component(c);
  const auto log_p = log_stick_break(state.zeta);
  const std::size_t L = state.truncation();
  std::vector<double> w(L), joint(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& c = state.components[l];
    w[l] = log_p[l] + log_normal_pdf(z_prev, c.mu, c.sigma2);
    joint[l] = w[l] + log_normal_pdf(z, response_mean(c, z_prev), response_variance(c));
  }
  return std::exp(log_sum_exp(joint) - log_sum_exp(w));
}

double stationary_marginal_density(double z, const StationaryState& state) {
  const auto log_p = log_stick_break(state.zeta);
  std::vector<double> terms(state.truncation());
  for (std::size_t l = 0; l < terms.size(); ++l)
    terms[l] = log_p[l] + log_normal_pdf(z, state.components[l].mu, state.components[l].sigma2);
  return std::exp(log_sum_exp(terms));
}

MixtureState embed(const StationaryState& state) {
  MixtureState out;
  out.components.reserve(state.truncation());
  for (const auto& c : state.components)
    out.components.push_back({c.mu, c.mu, c.beta, c.sigma2, response_variance(c)});
  out.zeta = state.zeta;
  out.weights = state.weights;
  out.alpha = state.alpha;
  const auto& p = state.psi;
  out.psi = {p.m, p.v, p.m, p.v, p.s, p.s, p.theta, p.c, p.nu, p.nu};
  return out;
}

StationaryState restrict_state(const MixtureState& state, double tolerance) {
  StationaryState out;
  for (const auto& eta : state.components) {
    StationaryComponent c{eta.mu_x, eta.delta_x, eta.beta};
    check_component(c);
    if (std::abs(eta.mu_x - eta.mu_y) > tolerance * (1.0 + std::abs(eta.mu_x)) ||
        std::abs(eta.delta_y - response_variance(c)) > tolerance * eta.delta_y)
      throw DomainError("mixture state is not of the stationary form");
    out.components.push_back(c);
  }
  out.zeta = state.zeta;
  out.weights = state.weights;
  out.alpha = state.alpha;
  const auto& p = state.psi;
  out.psi = {p.m_x, p.v_x, p.s_x, p.nu_x, p.theta, p.c};
  return out;
}

double beta_prior_mass(double theta, double c) {
  const double sd = std::sqrt(c);
  return normal_cdf((1.0 - theta) / sd) - normal_cdf((-1.0 - theta) / sd);
}

StationarySampler::StationarySampler(std::vector<double> series, HyperpriorConfig config,
                                     SamplerSettings settings)
    : StationarySampler(std::move(series), config, settings, StationaryState{}, {},
                        Rng(settings.seed)) {}

StationarySampler::StationarySampler(std::vector<double> series, HyperpriorConfig config,
                                     SamplerSettings settings, StationaryState state,
                                     std::vector<int> labels, Rng rng, std::size_t iteration)
    : series_(std::move(series)),
      config_(config),
      settings_(settings),
      state_(std::move(state)),
      labels_(std::move(labels)),
      rng_(std::move(rng)),
      iteration_(iteration) {
  if (series_.size() < 3) throw DomainError("series needs at least 3 observations");
  for (std::size_t i = 0; i < series_.size(); ++i)
    if (!std::isfinite(series_[i]))
      throw DomainError("series value " + std::to_string(i + 1) + " is not finite");
  config_.validate();
  settings_.validate();
  x_.assign(series_.begin(), series_.end() - 1);
  y_.assign(series_.begin() + 1, series_.end());
  const auto [lo, hi] = std::minmax_element(series_.begin(), series_.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) throw DomainError("series is constant");
  const std::size_t L = config_.truncation;
  scale_mu_.assign(L, settings_.rw_scale_mu_x > 0.0 ? settings_.rw_scale_mu_x : 0.1 * range / 4.0);
  scale_log_sigma2_.assign(L, settings_.rw_scale_log_delta_x > 0.0 ? settings_.rw_scale_log_delta_x : 0.3);
  scale_beta_.assign(L, 0.1);
  for (auto* m : {&moves_mu_, &moves_sigma2_, &moves_beta_, &window_mu_, &window_sigma2_}) m->resize(L);

  draws_.meta.model = "stationary";
  draws_.meta.n = series_.size();
  draws_.meta.truncation = L;
  draws_.meta.seed = settings_.seed;
  draws_.meta.series_hash = series_fingerprint(series_);
  draws_.meta.settings = settings_;

  if (state_.components.empty()) {
    initialize();
  } else {
    state_.validate();
    if (state_.truncation() != L) throw DomainError("state truncation does not match the configuration");
    if (labels_.size() != x_.size()) throw DomainError("label count must be n - 1");
    for (int u : labels_)
      if (u < 0 || static_cast<std::size_t>(u) >= L) throw DomainError("label out of range");
    refresh();
  }
}

void StationarySampler::initialize() {
  const std::size_t L = config_.truncation;
  iteration_ = 0;
  auto& psi = state_.psi;
  psi.m = config_.a_m_x;
  psi.v = config_.a_v_x > 1.0 ? config_.b_v_x / (config_.a_v_x - 1.0) : config_.b_v_x;
  psi.s = config_.a_s_x / config_.b_s_x;
  psi.nu = config_.nu_x;
  psi.theta = config_.a_theta;
  psi.c = config_.b_c / (config_.a_c - 1.0);
  state_.alpha = config_.a_alpha / config_.b_alpha;

  const std::size_t groups = std::min<std::size_t>({5, L, x_.size()});
  labels_ = kmeans_pairs(x_, y_, groups);
  const double floor = 1e-6 * variance_of(series_);
  state_.components.assign(L, StationaryComponent{});
  for (std::size_t g = 0; g < groups; ++g) {
    std::vector<double> pooled;
    for (std::size_t t = 0; t < x_.size(); ++t)
      if (labels_[t] == static_cast<int>(g)) {
        pooled.push_back(x_[t]);
        pooled.push_back(y_[t]);
      }
    if (pooled.empty()) pooled = series_;
    state_.components[g] = {mean_of(pooled), std::max(variance_of(pooled), floor), 0.0};
  }
  for (std::size_t l = groups; l < L; ++l) {
    auto& c = state_.components[l];
    c.mu = rng_.normal(psi.m, psi.v);
    c.sigma2 = rng_.inverse_gamma(psi.nu, psi.s);
    c.beta = sample_truncated_beta_prior(psi.theta, psi.c, rng_);
  }
  const double z0 = std::clamp(state_.alpha / (state_.alpha + 1.0), 1e-6, 1.0 - 1e-6);
  state_.set_sticks(std::vector<double>(L - 1, z0));
  refresh();
  const double ll = log_likelihood();
  if (!std::isfinite(ll)) {
    std::ostringstream msg;
    msg << "initialization produced a non-finite log-likelihood (" << ll << ")";
    throw NumericalError(msg.str());
  }
}

void StationarySampler::refresh() {
  rebuild_members();
  rebuild_cache();
}

void StationarySampler::rebuild_members() {
  const std::size_t L = state_.truncation();
  counts_ = occupancy(labels_, L);
  members_.assign(L, {});
  for (std::size_t t = 0; t < labels_.size(); ++t)
    members_[static_cast<std::size_t>(labels_[t])].push_back(t);
}

void StationarySampler::rebuild_cache() {
  std::vector<double> mu, var;
  for (const auto& c : state_.components) {
    mu.push_back(c.mu);
    var.push_back(c.sigma2);
  }
  cache_ = WeightKernelCache(x_, mu, var, log_stick_break(state_.zeta));
}

std::size_t StationarySampler::occupied() const {
  return static_cast<std::size_t>(std::count_if(counts_.begin(), counts_.end(), [](auto c) { return c > 0; }));
}

double StationarySampler::log_kernel(std::size_t t, std::size_t l) const {
  const auto& c = state_.components[l];
  return cache_.log_kernel(t, l) + log_normal_pdf(y_[t], response_mean(c, x_[t]), response_variance(c));
}

double StationarySampler::log_likelihood() const {
  const auto log_p = log_stick_break(state_.zeta);
  std::vector<double> terms(state_.truncation());
  double ll = 0.0;
  for (std::size_t t = 0; t < x_.size(); ++t) {
    for (std::size_t l = 0; l < terms.size(); ++l) terms[l] = log_p[l] + log_kernel(t, l);
    ll += log_sum_exp(terms) - cache_.log_normalizer(t);
  }
  return ll;
}

double StationarySampler::adapt(double scale, std::size_t attempts, double log_ratio) const {
  if (!adapting()) return scale;
  const double prob = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
  return scale * std::exp(std::pow(static_cast<double>(attempts) + 1.0, -0.6) * (prob - kTargetAcceptance));
}

void StationarySampler::sweep() {
  update_labels();
  update_mu();
  update_sigma2();
  update_beta();
  update_sticks();
  update_alpha();
  update_hyperparams();
  ++iteration_;
}

void StationarySampler::update_labels() {
  const auto log_p = log_stick_break(state_.zeta);
  std::vector<double> scores(state_.truncation());
  for (std::size_t t = 0; t < x_.size(); ++t) {
    for (std::size_t l = 0; l < scores.size(); ++l) scores[l] = log_p[l] + log_kernel(t, l);
    labels_[t] = static_cast<int>(rng_.categorical_log(scores));
  }
  rebuild_members();
  max_occupied_ = std::max(max_occupied_, occupied());
}

NormalParams StationarySampler::mu_gaussian_factor(std::size_t l) const {
  const auto& c = state_.components[l];
  const auto& psi = state_.psi;
  const double M = static_cast<double>(counts_[l]);
  const double vy = response_variance(c);
  double sx = 0.0, sr = 0.0;
  for (auto t : members_[l]) {
    sx += x_[t];
    sr += y_[t] + c.beta * x_[t];
  }
  const double b1 = 1.0 + c.beta;
  const double var = 1.0 / (1.0 / psi.v + M / c.sigma2 + M * b1 * b1 / vy);
  return {var * (psi.m / psi.v + sx / c.sigma2 + b1 * sr / vy), var};
}

InvGammaParams StationarySampler::sigma2_ig_factor(std::size_t l) const {
  const auto& c = state_.components[l];
  double ssx = 0.0, ssy = 0.0;
  for (auto t : members_[l]) {
    const double dx = x_[t] - c.mu;
    const double ry = y_[t] - response_mean(c, x_[t]);
    ssx += dx * dx;
    ssy += ry * ry;
  }
  return {state_.psi.nu + static_cast<double>(counts_[l]),
          state_.psi.s + 0.5 * ssx + 0.5 * ssy / (1.0 - c.beta * c.beta)};
}

double StationarySampler::beta_log_target(std::size_t l, double beta) const {
  if (!(std::abs(beta) < 1.0)) return -std::numeric_limits<double>::infinity();
  StationaryComponent c = state_.components[l];
  c.beta = beta;
  const double vy = response_variance(c);
  double lp = -0.5 * (beta - state_.psi.theta) * (beta - state_.psi.theta) / state_.psi.c;
  for (auto t : members_[l]) lp += log_normal_pdf(y_[t], response_mean(c, x_[t]), vy);
  return lp;
}

void StationarySampler::update_mu() {
  for (std::size_t l = 0; l < state_.truncation(); ++l) {
    auto& c = state_.components[l];
    const bool occupied = counts_[l] > 0;
    double proposal, log_ratio;
    if (occupied) {
      const auto g = mu_gaussian_factor(l);
      proposal = c.mu + scale_mu_[l] * rng_.standard_normal();
      const double d = cache_.propose(l, proposal, c.sigma2);
      log_ratio = log_normal_pdf(proposal, g.mean, g.variance) - log_normal_pdf(c.mu, g.mean, g.variance) - d;
    } else {
      proposal = rng_.normal(state_.psi.m, state_.psi.v);
      log_ratio = -cache_.propose(l, proposal, c.sigma2);
    }
    const bool accept = std::log(rng_.uniform()) < log_ratio;
    if (accept) {
      c.mu = proposal;
      cache_.accept();
    }
    if (occupied) {
      record(moves_mu_, &window_mu_, l, accept);
      scale_mu_[l] = adapt(scale_mu_[l], moves_mu_.proposed[l], log_ratio);
    }
  }
}

void StationarySampler::update_sigma2() {
  for (std::size_t l = 0; l < state_.truncation(); ++l) {
    auto& c = state_.components[l];
    const bool occupied = counts_[l] > 0;
    double proposal, log_ratio;
    if (occupied) {
      const auto f = sigma2_ig_factor(l);
      proposal = c.sigma2 * std::exp(scale_log_sigma2_[l] * rng_.standard_normal());
      const double d = cache_.propose(l, c.mu, proposal);
      log_ratio = log_ig_kernel(proposal, f.shape, f.scale) + std::log(proposal) -
                  log_ig_kernel(c.sigma2, f.shape, f.scale) - std::log(c.sigma2) - d;
    } else {
      proposal = rng_.inverse_gamma(state_.psi.nu, state_.psi.s);
      log_ratio = -cache_.propose(l, c.mu, proposal);
    }
    const bool accept = std::log(rng_.uniform()) < log_ratio;
    if (accept) {
      c.sigma2 = proposal;
      cache_.accept();
    }
    if (occupied) {
      record(moves_sigma2_, &window_sigma2_, l, accept);
      scale_log_sigma2_[l] = adapt(scale_log_sigma2_[l], moves_sigma2_.proposed[l], log_ratio);
    }
  }
}

void StationarySampler::update_beta() {
  for (std::size_t l = 0; l < state_.truncation(); ++l) {
    auto& c = state_.components[l];
    if (counts_[l] == 0) {
      c.beta = sample_truncated_beta_prior(state_.psi.theta, state_.psi.c, rng_);
      continue;
    }
    const double proposal = c.beta + scale_beta_[l] * rng_.standard_normal();
    const double log_ratio = beta_log_target(l, proposal) - beta_log_target(l, c.beta);
    const bool accept = std::log(rng_.uniform()) < log_ratio;
    if (accept) c.beta = proposal;
    record(moves_beta_, nullptr, l, accept);
    scale_beta_[l] = adapt(scale_beta_[l], moves_beta_.proposed[l], log_ratio);
  }
}

void StationarySampler::update_sticks() {
  if (state_.truncation() < 2) return;
  std::vector<double> zeta = state_.zeta;
  update_sticks_slice(zeta, state_.alpha, counts_, cache_.log_kernels(), rng_, slice_);
  state_.set_sticks(std::move(zeta));
  cache_.reweight(log_stick_break(state_.zeta));
}

void StationarySampler::update_alpha() {
  const auto g = alpha_conditional(config_.a_alpha, config_.b_alpha, state_.zeta);
  state_.alpha = rng_.gamma(g.shape, g.rate);
}

void StationarySampler::update_hyperparams() {
  auto& psi = state_.psi;
  const auto& comps = state_.components;
  const double L = static_cast<double>(comps.size());

  double s_mu = 0.0;
  for (const auto& c : comps) s_mu += c.mu;
  {
    const double var = 1.0 / (1.0 / config_.b_m_x + L / psi.v);
    psi.m = rng_.normal(var * (config_.a_m_x / config_.b_m_x + s_mu / psi.v), var);
  }
  double ss_mu = 0.0, inv_sigma = 0.0;
  for (const auto& c : comps) {
    ss_mu += (c.mu - psi.m) * (c.mu - psi.m);
    inv_sigma += 1.0 / c.sigma2;
  }
  psi.v = rng_.inverse_gamma(config_.a_v_x + 0.5 * L, config_.b_v_x + 0.5 * ss_mu);
  psi.s = rng_.gamma(config_.a_s_x + L * psi.nu, config_.b_s_x + inv_sigma);

  // theta and c see the beta prior through its truncation constant; the
  // untruncated conjugate posteriors serve as independence proposals.
  auto log_mass = [](double theta, double c) { return std::log(beta_prior_mass(theta, c)); };
  double s_beta = 0.0;
  for (const auto& c : comps) s_beta += c.beta;
  {
    const double var = 1.0 / (1.0 / config_.b_theta + L / psi.c);
    const double proposal = rng_.normal(var * (config_.a_theta / config_.b_theta + s_beta / psi.c), var);
    const double log_ratio = L * (log_mass(psi.theta, psi.c) - log_mass(proposal, psi.c));
    if (std::isfinite(log_ratio) && std::log(rng_.uniform()) < log_ratio) psi.theta = proposal;
  }
  double ss_beta = 0.0;
  for (const auto& c : comps) ss_beta += (c.beta - psi.theta) * (c.beta - psi.theta);
  {
    const double proposal = rng_.inverse_gamma(config_.a_c + 0.5 * L, config_.b_c + 0.5 * ss_beta);
    const double log_ratio = L * (log_mass(psi.theta, psi.c) - log_mass(psi.theta, proposal));
    if (std::isfinite(log_ratio) && std::log(rng_.uniform()) < log_ratio) psi.c = proposal;
  }
}

const PosteriorDraws& StationarySampler::run(const std::function<void(const TraceRecord&)>& on_trace) {
  while (iteration_ < settings_.n_iterations) {
    sweep();
    if (iteration_ <= settings_.burn_in || (iteration_ - settings_.burn_in) % settings_.thin != 0) continue;
    draws_.iterations.push_back(iteration_);
    draws_.draws.push_back(embed(state_));
    TraceRecord rec;
    rec.iteration = iteration_;
    rec.occupied = occupied();
    rec.alpha = state_.alpha;
    rec.log_likelihood = log_likelihood();
    rec.accept_mu_x = pooled_rate(window_mu_);
    rec.accept_log_delta_x = pooled_rate(window_sigma2_);
    rec.slice_violations = slice_.violations;
    window_mu_.resize(state_.truncation());
    window_sigma2_.resize(state_.truncation());
    trace_.push_back(rec);
    if (on_trace) on_trace(rec);
  }
  return draws_;
}

Checkpoint StationarySampler::checkpoint() const {
  Checkpoint cp;
  cp.model = "stationary";
  cp.series = series_;
  cp.config = config_;
  cp.settings = settings_;
  cp.chain.mixture = embed(state_);
  cp.chain.labels = labels_;
  cp.chain.iteration = iteration_;
  cp.chain.rng = rng_;
  cp.scale_mu_x = scale_mu_;
  cp.scale_log_delta_x = scale_log_sigma2_;
  cp.scale_beta = scale_beta_;
  cp.moves_mu_x = moves_mu_;
  cp.moves_delta_x = moves_sigma2_;
  cp.moves_beta = moves_beta_;
  cp.window_mu_x = window_mu_;
  cp.window_delta_x = window_sigma2_;
  cp.max_occupied = max_occupied_;
  cp.slice = slice_;
  cp.draws = draws_;
  cp.trace = trace_;
  return cp;
}

StationarySampler StationarySampler::resume(const Checkpoint& cp) {
  if (cp.model != "stationary") throw ValidationError("checkpoint is for model '" + cp.model + "'");
  StationarySampler s(cp.series, cp.config, cp.settings, restrict_state(cp.chain.mixture),
                      cp.chain.labels, cp.chain.rng, cp.chain.iteration);
  s.scale_mu_ = cp.scale_mu_x;
  s.scale_log_sigma2_ = cp.scale_log_delta_x;
  s.scale_beta_ = cp.scale_beta;
  s.moves_mu_ = cp.moves_mu_x;
  s.moves_sigma2_ = cp.moves_delta_x;
  s.moves_beta_ = cp.moves_beta;
  s.window_mu_ = cp.window_mu_x;
  s.window_sigma2_ = cp.window_delta_x;
  s.max_occupied_ = cp.max_occupied;
  s.slice_ = cp.slice;
  s.draws_ = cp.draws;
  s.draws_.meta.settings = cp.settings;
  s.trace_ = cp.trace;
  return s;
}

PosteriorDraws fit_stationary(std::vector<double> series, const HyperpriorConfig& config,
                              const SamplerSettings& settings) {
  StationarySampler sampler(std::move(series), config, settings);
  return sampler.run();
}

}  // namespace dpmts
