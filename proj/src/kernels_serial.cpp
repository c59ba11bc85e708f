#include "dpmts/kernels.hpp"
#include "kernel_ops.hpp"

namespace dpmts::kernels {

namespace serial {

Matrix density_matrix(const TransitionDraws& draws, double z_prev, std::span<const double> grid) {
  Matrix out(draws.size(), grid.size());
  for (std::size_t i = 0; i < draws.size(); ++i) detail::density_row(draws, i, z_prev, grid, out.row(i));
  return out;
}

Matrix expectation_matrix(const TransitionDraws& draws, std::span<const double> grid) {
  Matrix out(draws.size(), grid.size());
  for (std::size_t i = 0; i < draws.size(); ++i) detail::expectation_row(draws, i, grid, out.row(i));
  return out;
}

Matrix log_likelihood_matrix(const TransitionDraws& draws, std::span<const double> series) {
  Matrix out(draws.size(), series.size() > 0 ? series.size() - 1 : 0);
  for (std::size_t i = 0; i < draws.size(); ++i)
    detail::log_likelihood_row(draws, i, series, out.row(i));
  return out;
}

std::vector<double> log_weight_normalizers(const MixtureState& state, std::span<const double> x) {
  const auto log_p = log_stick_break(state.zeta);
  std::vector<double> scratch(log_p.size());
  std::vector<double> out(x.size());
  for (std::size_t t = 0; t < x.size(); ++t)
    out[t] = detail::log_weight_normalizer(state, log_p, x[t], scratch);
  return out;
}

}  // namespace serial

Matrix density_matrix(const TransitionDraws& draws, double z_prev, std::span<const double> grid,
                      ExecPolicy policy) {
  return policy == ExecPolicy::serial ? serial::density_matrix(draws, z_prev, grid)
                                      : omp::density_matrix(draws, z_prev, grid);
}

Matrix expectation_matrix(const TransitionDraws& draws, std::span<const double> grid,
                          ExecPolicy policy) {
  return policy == ExecPolicy::serial ? serial::expectation_matrix(draws, grid)
                                      : omp::expectation_matrix(draws, grid);
}

Matrix log_likelihood_matrix(const TransitionDraws& draws, std::span<const double> series,
                             ExecPolicy policy) {
  return policy == ExecPolicy::serial ? serial::log_likelihood_matrix(draws, series)
                                      : omp::log_likelihood_matrix(draws, series);
}

std::vector<double> log_weight_normalizers(const MixtureState& state, std::span<const double> x,
                                           ExecPolicy policy) {
  return policy == ExecPolicy::serial ? serial::log_weight_normalizers(state, x)
                                      : omp::log_weight_normalizers(state, x);
}

}  // namespace dpmts::kernels
