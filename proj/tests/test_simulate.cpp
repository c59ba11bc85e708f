#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dpmts/errors.hpp"
#include "dpmts/model.hpp"
#include "dpmts/simulate.hpp"
#include "dpmts/stationary.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace dpmts;
using testing_helpers::single;

TEST_CASE("Brownian motion has unit normal increments") {
  const auto z = simulate_brownian(20001, 3);
  REQUIRE(z.size() == 20001);
  CHECK(z[0] == 0.0);
  std::vector<double> inc;
  for (std::size_t t = 1; t < z.size(); ++t) inc.push_back(z[t] - z[t - 1]);
  oracle::GridDistribution g([](double x) { return -0.5 * x * x; }, -8.0, 8.0);
  CHECK(oracle::ks_distance(inc, g) < 0.015);
  CHECK(simulate_brownian(50, 3) == std::vector<double>(z.begin(), z.begin() + 50));
  CHECK(simulate_brownian(50, 4) != simulate_brownian(50, 3));
}

TEST_CASE("Brownian variance grows linearly") {
  std::vector<double> end;
  for (std::uint64_t s = 0; s < 20000; ++s) end.push_back(simulate_brownian(100, 1000 + s).back());
  // z_100 is a sum of 99 increments.
  CHECK(oracle::variance(end) == doctest::Approx(99.0).epsilon(0.04));
  CHECK(std::abs(oracle::mean(end)) < 4.0 * std::sqrt(99.0 / 20000.0));
}

TEST_CASE("skew-normal density, moments and draws") {
  const SkewNormalParams p{1.0, 2.0, 3.0};
  CHECK(oracle::integrate([&](double y) { return std::exp(sn_log_pdf(y, p)); }, -30, 30) ==
        doctest::Approx(1.0).epsilon(1e-8));
  const double m = oracle::integrate([&](double y) { return y * std::exp(sn_log_pdf(y, p)); }, -30, 30);
  CHECK(sn_mean(p) == doctest::Approx(m).epsilon(1e-8));
  CHECK(sn_variance(p) == doctest::Approx(oracle::integrate(
                                              [&](double y) { return (y - m) * (y - m) * std::exp(sn_log_pdf(y, p)); },
                                              -30, 30))
                              .epsilon(1e-8));
  CHECK(sn_third_central_moment(p) ==
        doctest::Approx(oracle::integrate(
                            [&](double y) { return std::pow(y - m, 3) * std::exp(sn_log_pdf(y, p)); }, -30, 30))
            .epsilon(1e-6));

  const SkewNormalParams sym{0.5, 1.5, 0.0};
  CHECK(sn_log_pdf(0.9, sym) == doctest::Approx(std::log(oracle::normal_pdf(0.9, 0.5, 2.25))));
  CHECK(sn_mean(sym) == doctest::Approx(0.5));
  CHECK(sn_third_central_moment(sym) == doctest::Approx(0.0));
  CHECK(sn_third_central_moment({0.0, 1.0, -2.0}) < 0.0);
  CHECK(sn_third_central_moment({0.0, 1.0, 2.0}) > 0.0);

  Rng r(2);
  std::vector<double> d(100000);
  for (auto& v : d) v = sn_sample(p, r);
  CHECK(oracle::ks_distance(d, oracle::GridDistribution([&](double y) { return sn_log_pdf(y, p); }, -15, 20)) < 0.01);
  CHECK_THROWS_AS(SkewNormalParams({0.0, -1.0, 0.0}).validate(), DomainError);
}

TEST_CASE("skew-normal test process") {
  const auto t = skew_normal_transition(-1.5);
  CHECK(t.xi == 0.0);
  CHECK(t.omega == doctest::Approx(1.0 + 0.7 * 1.5));
  CHECK(t.alpha_skew == doctest::Approx(0.1 + 4.0 * std::sin(-1.5)));
  const auto z = simulate_skew_normal_series(500, 0.3, 8);
  REQUIRE(z.size() == 500);
  CHECK(z[0] == 0.3);
  CHECK(z == simulate_skew_normal_series(500, 0.3, 8));
  for (double v : z) REQUIRE(std::isfinite(v));
}

TEST_CASE("ancestral sampling from a random-walk kernel") {
  const auto rw = single({0.0, 0.0, -1.0, 1.0, 1.0});
  const auto z = simulate_from_model(rw, 2.0, 20001, 5);
  CHECK(z[0] == 2.0);
  std::vector<double> inc;
  for (std::size_t t = 1; t < z.size(); ++t) inc.push_back(z[t] - z[t - 1]);
  CHECK(oracle::ks_distance(inc, oracle::GridDistribution([](double x) { return -0.5 * x * x; }, -8, 8)) < 0.015);
}

TEST_CASE("ancestral sampling reproduces a two-component transition") {
  // Fix z_{t-1} by restarting from the same point: each step is one draw from f(. | 0.4).
  MixtureState s;
  s.components = {{-1.0, -2.0, 0.5, 1.0, 0.3}, {2.0, 3.0, -0.2, 1.5, 0.6}};
  s.set_sticks({0.45});
  std::vector<double> d;
  for (std::uint64_t k = 0; k < 40000; ++k) d.push_back(simulate_from_model(s, 0.4, 2, 100 + k)[1]);
  oracle::GridDistribution g([&](double y) { return std::log(transition_density(y, 0.4, s)); }, -8, 9);
  CHECK(oracle::ks_distance(d, g) < 0.012);

  // Binned check of the mixture split around the valley between the modes.
  const double split = 0.5;
  const double p_low = oracle::integrate([&](double y) { return transition_density(y, 0.4, s); }, -20, split);
  double low = 0;
  for (double v : d) low += v < split;
  CHECK(std::abs(low / d.size() - p_low) < 4.0 * std::sqrt(p_low * (1 - p_low) / d.size()));
}

TEST_CASE("simulation is reproducible from the seed") {
  std::mt19937_64 gen(1);
  const auto s = testing_helpers::random_state(4, gen);
  CHECK(simulate_from_model(s, 0.0, 300, 17) == simulate_from_model(s, 0.0, 300, 17));
  CHECK(simulate_from_model(s, 0.0, 300, 17) != simulate_from_model(s, 0.0, 300, 18));
}

TEST_CASE("a stationary zero-slope model samples its marginal") {
  StationaryState st;
  st.components = {{-1.0, 0.5, 0.0}, {2.0, 1.0, 0.0}};
  st.set_sticks({0.3});
  const auto z = simulate_from_model(embed(st), 0.0, 60001, 21);
  const std::vector<double> tail(z.begin() + 1000, z.end());
  oracle::GridDistribution g([&](double y) { return std::log(stationary_marginal_density(y, st)); }, -8, 8);
  CHECK(oracle::ks_distance(tail, g) < 0.02);
}
