#pragma once

// Per-element operations shared by the serial and OpenMP kernels.

#include <span>

#include "dpmts/gaussian.hpp"
#include "dpmts/kernels.hpp"

namespace dpmts::kernels::detail {

inline void density_row(const TransitionDraws& draws, std::size_t i, double z_prev,
                        std::span<const double> grid, std::span<double> out) {
  const auto mix = draws.conditional(i, z_prev);
  for (std::size_t j = 0; j < grid.size(); ++j) out[j] = mix.density(grid[j]);
}

inline void expectation_row(const TransitionDraws& draws, std::size_t i,
                            std::span<const double> grid, std::span<double> out) {
  for (std::size_t j = 0; j < grid.size(); ++j) out[j] = draws.conditional(i, grid[j]).mean();
}

inline void log_likelihood_row(const TransitionDraws& draws, std::size_t i,
                               std::span<const double> series, std::span<double> out) {
  for (std::size_t t = 0; t + 1 < series.size(); ++t)
    out[t] = draws.conditional(i, series[t]).log_density(series[t + 1]);
}

inline double log_weight_normalizer(const MixtureState& state, std::span<const double> log_p,
                                     double x, std::span<double> scratch) {
  for (std::size_t m = 0; m < log_p.size(); ++m) {
    const auto& eta = state.components[m];
    scratch[m] = log_p[m] + log_normal_pdf(x, eta.mu_x, eta.delta_x);
  }
  return log_sum_exp(scratch);
}

}  // namespace dpmts::kernels::detail
