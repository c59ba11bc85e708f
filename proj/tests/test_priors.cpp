#include <doctest.h>

#include <cmath>

#include "dpmts/errors.hpp"
#include "dpmts/io.hpp"
#include "dpmts/model.hpp"
#include "dpmts/priors.hpp"
#include "dpmts/random.hpp"
#include "oracles.hpp"

using namespace dpmts;

namespace {

double prior_mean_delta(double a_s, double b_s, double nu) { return a_s / (b_s * (nu - 1.0)); }

// One draw of G from the hyperprior, truncated at L.
MixtureState prior_draw(const HyperpriorConfig& h, Rng& r) {
  MixtureState s;
  s.psi.m_x = r.normal(h.a_m_x, h.b_m_x);
  s.psi.m_y = r.normal(h.a_m_y, h.b_m_y);
  s.psi.v_x = r.inverse_gamma(h.a_v_x, h.b_v_x);
  s.psi.v_y = r.inverse_gamma(h.a_v_y, h.b_v_y);
  s.psi.s_x = r.gamma(h.a_s_x, h.b_s_x);
  s.psi.s_y = r.gamma(h.a_s_y, h.b_s_y);
  s.psi.theta = r.normal(h.a_theta, h.b_theta);
  s.psi.c = r.inverse_gamma(h.a_c, h.b_c);
  s.alpha = r.gamma(h.a_alpha, h.b_alpha);
  s.components.resize(h.truncation);
  for (auto& c : s.components) {
    c.mu_x = r.normal(s.psi.m_x, s.psi.v_x);
    c.mu_y = r.normal(s.psi.m_y, s.psi.v_y);
    c.beta = r.normal(s.psi.theta, s.psi.c);
    c.delta_x = r.inverse_gamma(h.nu_x, s.psi.s_x);
    c.delta_y = r.inverse_gamma(h.nu_y, s.psi.s_y);
  }
  std::vector<double> zeta(h.truncation - 1);
  for (auto& z : zeta) z = std::clamp(r.beta(std::max(s.alpha, 1e-3), 1.0), 1e-12, 1.0 - 1e-12);
  s.set_sticks(zeta);
  return s;
}

}  // namespace

TEST_CASE("default priors satisfy the variance identities") {
  const auto h = default_priors({10.0, 8.0});
  CHECK(h.a_theta == 0.0);
  CHECK(h.b_theta + h.b_c / (h.a_c - 1.0) == 1.0);
  CHECK(h.a_m_x == 10.0);
  CHECK(h.a_m_y == 10.0);
  CHECK(h.b_m_x + h.b_v_x / (h.a_v_x - 1.0) == doctest::Approx(4.0));
  CHECK(h.b_m_y + h.b_v_y / (h.a_v_y - 1.0) == doctest::Approx(4.0));
  CHECK(prior_mean_delta(h.a_s_x, h.b_s_x, h.nu_x) == doctest::Approx(4.0));
  CHECK(prior_mean_delta(h.a_s_y, h.b_s_y, h.nu_y) == doctest::Approx(4.0));
  CHECK(h.a_alpha == 0.5);
  CHECK(h.b_alpha == 0.5);
  CHECK(h.truncation == 30);
  CHECK_NOTHROW(h.validate());
}

TEST_CASE("unit proxy: d = 0, r = 4") {
  const auto h = default_priors({0.0, 4.0});
  CHECK(prior_mean_delta(h.a_s_y, h.b_s_y, h.nu_y) == doctest::Approx(1.0));
  CHECK(h.b_m_y + h.b_v_y / (h.a_v_y - 1.0) == doctest::Approx(1.0));
}

TEST_CASE("Old Faithful proxy") {
  const auto series = read_series(DPMTS_DATA_DIR "/faithful.csv", "waiting");
  REQUIRE(series.size() == 272);
  const auto proxy = proxy_from_series(series);
  CHECK(proxy.range == 53.0);
  CHECK(proxy.center == 69.5);
  const auto h = default_priors(proxy);
  CHECK(prior_mean_delta(h.a_s_x, h.b_s_x, h.nu_x) == doctest::Approx(175.5625));
}

TEST_CASE("shapes not above one are rejected") {
  PriorShapes s;
  s.a_c = 1.0;
  CHECK_THROWS_AS(default_priors({0, 1}, s), DomainError);
  s = {};
  s.nu = 0.5;
  CHECK_THROWS_AS(default_priors({0, 1}, s), DomainError);
  CHECK_THROWS_AS(default_priors({0, 0}), DomainError);
  HyperpriorConfig bad;
  bad.a_c = 0.9;
  CHECK_THROWS_AS(bad.validate(), DomainError);
  bad = {};
  bad.b_v_y = -1.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("default priors are scale equivariant") {
  const double a = 3.0, b = -7.0;
  const DataProxy p{2.0, 5.0};
  const auto h = default_priors(p);
  const auto g = default_priors({a * p.center + b, a * p.range});
  CHECK(g.a_m_x == doctest::Approx(a * h.a_m_x + b));
  CHECK(g.a_m_y == doctest::Approx(a * h.a_m_y + b));
  CHECK(g.b_m_x == doctest::Approx(a * a * h.b_m_x));
  CHECK(g.b_v_y == doctest::Approx(a * a * h.b_v_y));
  CHECK(prior_mean_delta(g.a_s_x, g.b_s_x, g.nu_x) ==
        doctest::Approx(a * a * prior_mean_delta(h.a_s_x, h.b_s_x, h.nu_x)));
  CHECK(g.b_s_y == doctest::Approx(h.b_s_y / (a * a)));
  CHECK(g.b_theta == h.b_theta);
  CHECK(g.b_c == h.b_c);
}

TEST_CASE("prior predictive conditional expectation is centered at d") {
  const DataProxy p{25.0, 12.0};
  auto h = default_priors(p);
  h.truncation = 10;
  Rng r(31);
  std::vector<double> e(10000);
  for (auto& v : e) v = conditional_expectation(p.center, prior_draw(h, r));
  const double se = std::sqrt(oracle::variance(e) / static_cast<double>(e.size()));
  CHECK(std::abs(oracle::mean(e) - p.center) < 3.0 * se);
}

TEST_CASE("prior mean and variance of beta") {
  const auto h = default_priors({0.0, 1.0});
  Rng r(8);
  std::vector<double> b(200000);
  for (auto& v : b) v = r.normal(r.normal(h.a_theta, h.b_theta), r.inverse_gamma(h.a_c, h.b_c));
  const double m = oracle::mean(b);
  CHECK(std::abs(m) < 3.0 * std::sqrt(1.0 / static_cast<double>(b.size())));
  CHECK(oracle::variance(b) == doctest::Approx(1.0).epsilon(0.05));
}
