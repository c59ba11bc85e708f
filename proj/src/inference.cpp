#include "dpmts/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpmts/errors.hpp"
#include "dpmts/gaussian.hpp"
#include "dpmts/random.hpp"
#include "dpmts/stats.hpp"

namespace dpmts {

namespace {

void require_draws(const TransitionDraws& draws) {
  if (draws.size() == 0) throw ValidationError("no posterior draws");
}

void require_grid(std::span<const double> grid) {
  if (grid.empty()) throw DomainError("grid is empty");
  if (!std::is_sorted(grid.begin(), grid.end())) throw DomainError("grid must be sorted");
}

void require_level(double level) {
  if (!(level > 0.0 && level < 1.0)) throw DomainError("credible level must lie in (0, 1)");
}

// Per-draw work of the multi-step forecast: densities (h x grid) and paths (P x h).
void forecast_draw(const TransitionDraws& draws, std::size_t i, double z_n, std::size_t horizon,
                   std::size_t paths_per_draw, std::span<const double> grid, std::uint64_t seed,
                   std::vector<Matrix>& density, Matrix& paths) {
  Rng rng(derive_seed(seed, i));
  const double inv = 1.0 / static_cast<double>(paths_per_draw);
  for (std::size_t j = 0; j < paths_per_draw; ++j) {
    double z = z_n;
    for (std::size_t k = 0; k < horizon; ++k) {
      const auto mix = draws.conditional(i, z);
      auto row = density[k].row(i);
      for (std::size_t g = 0; g < grid.size(); ++g) row[g] += inv * mix.density(grid[g]);
      z = mix.sample(rng);
      paths(i * paths_per_draw + j, k) = z;
    }
  }
}

}  // namespace

std::vector<double> linspace(double lo, double hi, std::size_t points) {
  if (points < 2) throw DomainError("a grid needs at least two points");
  if (!(lo < hi)) throw DomainError("grid bounds must satisfy lo < hi");
  std::vector<double> out(points);
  const double step = (hi - lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

std::vector<double> default_grid(std::span<const double> series, std::size_t points, double extend) {
  if (series.empty()) throw DomainError("series is empty");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  const double range = *hi - *lo > 0.0 ? *hi - *lo : 1.0;
  return linspace(*lo - extend * range, *hi + extend * range, points);
}

DensityGrid summarize(const Matrix& values, std::span<const double> grid, double level) {
  require_level(level);
  if (values.rows == 0) throw ValidationError("no posterior draws");
  DensityGrid out;
  out.level = level;
  out.z.assign(grid.begin(), grid.end());
  out.mean.resize(grid.size());
  out.lower.resize(grid.size());
  out.upper.resize(grid.size());
  std::vector<double> column(values.rows);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < values.rows; ++i) {
      column[i] = values(i, j);
      s += column[i];
    }
    out.mean[j] = s / static_cast<double>(values.rows);
    std::sort(column.begin(), column.end());
    out.lower[j] = quantile_sorted(column, 0.5 * (1.0 - level));
    out.upper[j] = quantile_sorted(column, 0.5 * (1.0 + level));
  }
  return out;
}

DensityGrid transition_grid(const TransitionDraws& draws, double z_prev, std::span<const double> grid,
                            double level, ExecPolicy policy) {
  require_draws(draws);
  require_grid(grid);
  return summarize(kernels::density_matrix(draws, z_prev, grid, policy), grid, level);
}

DensityGrid forecast_density(const TransitionDraws& draws, double z_n, std::span<const double> grid,
                             double level, ExecPolicy policy) {
  return transition_grid(draws, z_n, grid, level, policy);
}

DensityGrid expectation_curve(const TransitionDraws& draws, std::span<const double> grid, double level,
                              ExecPolicy policy) {
  require_draws(draws);
  require_grid(grid);
  return summarize(kernels::expectation_matrix(draws, grid, policy), grid, level);
}

MultiStepForecast multi_step_forecast(const TransitionDraws& draws, double z_n, std::size_t horizon,
                                      std::size_t paths_per_draw, std::span<const double> grid,
                                      std::uint64_t seed, double level, ExecPolicy policy) {
  require_draws(draws);
  require_grid(grid);
  if (horizon < 1) throw DomainError("forecast horizon must be at least 1");
  if (paths_per_draw < 1) throw DomainError("paths per draw must be at least 1");
  const std::size_t S = draws.size();
  std::vector<Matrix> density(horizon, Matrix(S, grid.size()));
  MultiStepForecast out;
  out.paths = Matrix(S * paths_per_draw, horizon);
  if (policy == ExecPolicy::serial) {
    for (std::size_t i = 0; i < S; ++i)
      forecast_draw(draws, i, z_n, horizon, paths_per_draw, grid, seed, density, out.paths);
  } else {
    const auto n = static_cast<std::ptrdiff_t>(S);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
      forecast_draw(draws, static_cast<std::size_t>(i), z_n, horizon, paths_per_draw, grid, seed, density,
                    out.paths);
  }
  for (std::size_t k = 0; k < horizon; ++k) out.horizons.push_back(summarize(density[k], grid, level));
  return out;
}

PpoResult ppo_from_log_likelihood(const Matrix& log_lik, std::size_t t_start) {
  const std::size_t S = log_lik.rows;
  const std::size_t n = log_lik.cols + 1;
  if (S == 0) throw ValidationError("no posterior draws");
  if (t_start < 3 || t_start > n)
    throw DomainError("t_start must lie in [3, " + std::to_string(n) + "], got " + std::to_string(t_start));

  // tail(i, j) = sum of log f over columns j..n-2; tail(i, n-1) = 0.
  Matrix tail(S, n);
  for (std::size_t i = 0; i < S; ++i) {
    double acc = 0.0;
    for (std::size_t j = n - 1; j-- > 0;) {
      acc += log_lik(i, j);
      tail(i, j) = acc;
    }
  }
  const double log_s = std::log(static_cast<double>(S));
  std::vector<double> a(S), a2(S);
  auto log_mean_inverse = [&](std::size_t col, double* ess) {
    for (std::size_t i = 0; i < S; ++i) {
      a[i] = -tail(i, col);
      a2[i] = 2.0 * a[i];
    }
    const double lse = log_sum_exp(a);
    if (ess) *ess = std::exp(2.0 * lse - log_sum_exp(a2));
    return lse - log_s;
  };

  PpoResult out;
  out.t_start = t_start;
  for (std::size_t t = t_start; t <= n; ++t) {
    double ess = 0.0;
    const double den = log_mean_inverse(t - 2, &ess);
    const double num = log_mean_inverse(t - 1, nullptr);
    const double v = num - den;
    out.t.push_back(t);
    out.log_ordinate.push_back(v);
    out.ess.push_back(ess);
    out.finite.push_back(std::isfinite(v));
    out.all_finite = out.all_finite && std::isfinite(v);
    out.log_sum += v;
  }
  return out;
}

PpoResult ppo(const TransitionDraws& draws, std::span<const double> series, std::size_t t_start,
              ExecPolicy policy) {
  require_draws(draws);
  if (series.size() < 3) throw DomainError("series needs at least 3 observations");
  return ppo_from_log_likelihood(kernels::log_likelihood_matrix(draws, series, policy), t_start);
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("trapezoid needs matching x and y");
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

}  // namespace dpmts
