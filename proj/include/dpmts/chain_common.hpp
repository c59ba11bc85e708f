#pragma once

// Building blocks shared by the general and stationary mixture samplers.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dpmts/kernels.hpp"
#include "dpmts/random.hpp"

namespace dpmts {

struct NormalParams {
  double mean, variance;
};
struct GammaParams {
  double shape, rate;
};
struct InvGammaParams {
  double shape, scale;
};

/// Caches the weight kernels log c_{t,m} = log N(x_t | mu_m, var_m) and the
/// per-t normalizers D_t = sum_m p_m c_{t,m}, so that a Metropolis proposal for
/// one component costs O(n) instead of O(nL).
///
/// Rows are stored as exp(log p_m + log c_{t,m} - shift_t) with shift_t chosen
/// at the last full rebuild of the row; D_t = exp(shift_t) * sum_m terms.
class WeightKernelCache {
 public:
  WeightKernelCache() = default;
  WeightKernelCache(std::span<const double> x, std::span<const double> mu,
                    std::span<const double> var, std::span<const double> log_weights);

  std::size_t rows() const { return x_.size(); }
  std::size_t cols() const { return log_weights_.size(); }
  double log_kernel(std::size_t t, std::size_t m) const { return log_c_(t, m); }
  const Matrix& log_kernels() const { return log_c_; }

  /// log D = sum_t log D_t.
  double log_normalizer() const;
  /// log D_t for one row.
  double log_normalizer(std::size_t t) const { return shift_[t] + std::log(sum_[t]); }

  /// Stages new kernel parameters for component m and returns
  /// log D(new) - log D(current). Nothing changes until accept().
  double propose(std::size_t m, double mu, double var);
  void accept();

  /// Replaces the mixture weights (after a stick update) and rebuilds all rows.
  void reweight(std::span<const double> log_weights);

 private:
  void rebuild_row(std::size_t t);

  std::vector<double> x_;
  std::vector<double> log_weights_;
  Matrix log_c_;
  Matrix terms_;
  std::vector<double> shift_;
  std::vector<double> sum_;

  // staged proposal
  std::size_t pending_m_ = 0;
  std::vector<double> pending_log_c_;
  std::vector<double> pending_term_;
  std::vector<double> pending_sum_;
  std::vector<std::size_t> pending_rebuild_;
};

struct SliceStats {
  std::uint64_t updates = 0;     // number of zeta_l draws
  std::uint64_t checks = 0;      // number of (l, t) slice constraints verified
  std::uint64_t violations = 0;  // constraints found broken after the draw
};

/// Linear decomposition d_t(zeta_l) = zeta_l * w1_t + w0_t of the weight
/// normalizer, for every t, with the other sticks held at their current values.
struct StickDecomposition {
  std::vector<double> w1, w0;
};

/// Runs the slice-sampler update of zeta_0..zeta_{L-2} in order.
///
/// For each l, fresh auxiliaries u_t ~ U(0, 1/d_t) are drawn, the admissible
/// interval for zeta_l is intersected over t, and zeta_l is drawn from
/// Beta(alpha + sum_{r>l} M_r, M_l + 1) truncated to it by inverse CDF.
/// `log_kernel` holds log c_{t,m}; `counts` the occupancies M_m.
void update_sticks_slice(std::vector<double>& zeta, double alpha,
                         std::span<const std::size_t> counts, const Matrix& log_kernel, Rng& rng,
                         SliceStats& stats);

/// The decomposition for stick l at the current sticks; c is the (row-scaled)
/// kernel matrix in linear space. Uses the same recursion as the updater.
StickDecomposition decompose_sticks(std::span<const double> zeta, std::size_t l, const Matrix& c);

/// Admissible interval for one stick given the decomposition and the slice
/// bounds 1/u_t: (max_{w1<0} (b_t - w0)/w1, min_{w1>0} (b_t - w0)/w1) ∩ (0, 1).
struct Interval {
  double lo, hi;
};
Interval admissible_interval(std::span<const double> w1, std::span<const double> w0,
                             std::span<const double> inv_u);

/// Full conditional of alpha: Gamma(a + L - 1, b - log p_L).
GammaParams alpha_conditional(double a_alpha, double b_alpha, std::span<const double> zeta);

/// Occupancy counts from labels.
std::vector<std::size_t> occupancy(std::span<const int> labels, std::size_t truncation);

}  // namespace dpmts
