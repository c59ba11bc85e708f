#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dpmts/kernels.hpp"
#include "dpmts/transition.hpp"

namespace dpmts {

/// Pointwise posterior summary of a function on a grid: draw average and
/// equal-tailed credible bounds at `level`.
struct DensityGrid {
  std::vector<double> z;
  std::vector<double> mean;
  std::vector<double> lower;
  std::vector<double> upper;
  double level = 0.95;
};

std::vector<double> linspace(double lo, double hi, std::size_t points);

/// `points` values spanning the data range widened by `extend` times the range
/// on each side.
std::vector<double> default_grid(std::span<const double> series, std::size_t points = 512,
                                 double extend = 0.25);

/// Summarizes a draws x grid matrix column by column.
DensityGrid summarize(const Matrix& values, std::span<const double> grid, double level);

/// f(z | z_prev) over the grid, one row per draw, summarized.
DensityGrid transition_grid(const TransitionDraws& draws, double z_prev, std::span<const double> grid,
                            double level = 0.95, ExecPolicy policy = ExecPolicy::parallel);

/// One-step posterior predictive density p(z_{n+1} | data) with bands.
DensityGrid forecast_density(const TransitionDraws& draws, double z_n, std::span<const double> grid,
                             double level = 0.95, ExecPolicy policy = ExecPolicy::parallel);

/// E(Z_t | Z_{t-1} = z) over a grid of z.
DensityGrid expectation_curve(const TransitionDraws& draws, std::span<const double> grid,
                              double level = 0.95, ExecPolicy policy = ExecPolicy::parallel);

struct MultiStepForecast {
  /// Density summaries for horizons 1..h.
  std::vector<DensityGrid> horizons;
  /// Simulated paths, (draws * paths_per_draw) x h; row i * paths_per_draw + j
  /// is path j under draw i.
  Matrix paths;
};

/// Forecasts h steps past z_n. Each draw simulates `paths_per_draw`
/// trajectories; its density at horizon k averages the draw's transition
/// density over the simulated states at k - 1, so horizon 1 is exact. Draw i
/// uses the stream derive_seed(seed, i), making the result independent of the
/// execution policy.
MultiStepForecast multi_step_forecast(const TransitionDraws& draws, double z_n, std::size_t horizon,
                                      std::size_t paths_per_draw, std::span<const double> grid,
                                      std::uint64_t seed, double level = 0.95,
                                      ExecPolicy policy = ExecPolicy::parallel);

/// One-step-ahead posterior predictive ordinates p(z_t | z_1..z_{t-1}) from a
/// fit to the full series. Indices t are 1-based.
struct PpoResult {
  std::size_t t_start = 0;
  std::vector<std::size_t> t;
  std::vector<double> log_ordinate;
  /// Effective sample size of the inverse-likelihood weights behind each ordinate.
  std::vector<double> ess;
  std::vector<bool> finite;
  double log_sum = 0.0;
  bool all_finite = true;
};

PpoResult ppo(const TransitionDraws& draws, std::span<const double> series, std::size_t t_start,
              ExecPolicy policy = ExecPolicy::parallel);

/// Same estimator from a precomputed draws x (n-1) matrix of log f(z_{s+1} | z_s).
PpoResult ppo_from_log_likelihood(const Matrix& log_lik, std::size_t t_start);

/// Trapezoid rule on a sorted grid.
double trapezoid(std::span<const double> x, std::span<const double> y);

}  // namespace dpmts
