#pragma once

// Data-parallel evaluation kernels. Every kernel has a serial reference
// implementation and an OpenMP implementation that writes each output element
// from exactly one iteration, so both produce bit-identical results.

#include <cstddef>
#include <span>
#include <vector>

#include "dpmts/model.hpp"
#include "dpmts/transition.hpp"

namespace dpmts {

enum class ExecPolicy { serial, parallel };

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
};

namespace kernels {

/// f(grid[j] | z_prev) under draw i, as a draws x grid matrix.
Matrix density_matrix(const TransitionDraws& draws, double z_prev, std::span<const double> grid,
                      ExecPolicy policy = ExecPolicy::parallel);

/// E(Z_t | Z_{t-1} = grid[j]) under draw i.
Matrix expectation_matrix(const TransitionDraws& draws, std::span<const double> grid,
                          ExecPolicy policy = ExecPolicy::parallel);

/// log f(z_{t+1} | z_t) under draw i, for t = 0..n-2 (0-based series).
Matrix log_likelihood_matrix(const TransitionDraws& draws, std::span<const double> series,
                             ExecPolicy policy = ExecPolicy::parallel);

/// log sum_m p_m N(x_t | mu_x_m, delta_x_m) for every x_t; the per-t terms of
/// the weight normalizer D.
std::vector<double> log_weight_normalizers(const MixtureState& state, std::span<const double> x,
                                           ExecPolicy policy = ExecPolicy::parallel);

namespace serial {
Matrix density_matrix(const TransitionDraws&, double, std::span<const double>);
Matrix expectation_matrix(const TransitionDraws&, std::span<const double>);
Matrix log_likelihood_matrix(const TransitionDraws&, std::span<const double>);
std::vector<double> log_weight_normalizers(const MixtureState&, std::span<const double>);
}  // namespace serial

namespace omp {
Matrix density_matrix(const TransitionDraws&, double, std::span<const double>);
Matrix expectation_matrix(const TransitionDraws&, std::span<const double>);
Matrix log_likelihood_matrix(const TransitionDraws&, std::span<const double>);
std::vector<double> log_weight_normalizers(const MixtureState&, std::span<const double>);
}  // namespace omp

}  // namespace kernels
}  // namespace dpmts
