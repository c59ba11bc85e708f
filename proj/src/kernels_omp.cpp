#include <omp.h>

#include "dpmts/kernels.hpp"
#include "kernel_ops.hpp"

namespace dpmts::kernels::omp {

Matrix density_matrix(const TransitionDraws& draws, double z_prev, std::span<const double> grid) {
  Matrix out(draws.size(), grid.size());
  const auto n = static_cast<std::ptrdiff_t>(draws.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    detail::density_row(draws, static_cast<std::size_t>(i), z_prev, grid, out.row(static_cast<std::size_t>(i)));
  return out;
}

Matrix expectation_matrix(const TransitionDraws& draws, std::span<const double> grid) {
  Matrix out(draws.size(), grid.size());
  const auto n = static_cast<std::ptrdiff_t>(draws.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    detail::expectation_row(draws, static_cast<std::size_t>(i), grid, out.row(static_cast<std::size_t>(i)));
  return out;
}

Matrix log_likelihood_matrix(const TransitionDraws& draws, std::span<const double> series) {
  Matrix out(draws.size(), series.size() > 0 ? series.size() - 1 : 0);
  const auto n = static_cast<std::ptrdiff_t>(draws.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    detail::log_likelihood_row(draws, static_cast<std::size_t>(i), series, out.row(static_cast<std::size_t>(i)));
  return out;
}

std::vector<double> log_weight_normalizers(const MixtureState& state, std::span<const double> x) {
  const auto log_p = log_stick_break(state.zeta);
  std::vector<double> out(x.size());
  const auto n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel
  {
    std::vector<double> scratch(log_p.size());
#pragma omp for schedule(static)
    for (std::ptrdiff_t t = 0; t < n; ++t)
      out[static_cast<std::size_t>(t)] =
          detail::log_weight_normalizer(state, log_p, x[static_cast<std::size_t>(t)], scratch);
  }
  return out;
}

}  // namespace dpmts::kernels::omp
