#include "dpmts/chain_common.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

#include "dpmts/errors.hpp"
#include "dpmts/gaussian.hpp"

namespace dpmts {

WeightKernelCache::WeightKernelCache(std::span<const double> x, std::span<const double> mu,
                                     std::span<const double> var,
                                     std::span<const double> log_weights)
    : x_(x.begin(), x.end()),
      log_weights_(log_weights.begin(), log_weights.end()),
      log_c_(x.size(), log_weights.size()),
      terms_(x.size(), log_weights.size()),
      shift_(x.size()),
      sum_(x.size()) {
  for (std::size_t t = 0; t < x_.size(); ++t) {
    for (std::size_t m = 0; m < cols(); ++m) log_c_(t, m) = log_normal_pdf(x_[t], mu[m], var[m]);
    rebuild_row(t);
  }
}

void WeightKernelCache::rebuild_row(std::size_t t) {
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < cols(); ++m) hi = std::max(hi, log_weights_[m] + log_c_(t, m));
  double s = 0.0;
  for (std::size_t m = 0; m < cols(); ++m) {
    terms_(t, m) = std::exp(log_weights_[m] + log_c_(t, m) - hi);
    s += terms_(t, m);
  }
  shift_[t] = hi;
  sum_[t] = s;
}

double WeightKernelCache::log_normalizer() const {
  double acc = 0.0;
  for (std::size_t t = 0; t < rows(); ++t) acc += log_normalizer(t);
  return acc;
}

double WeightKernelCache::propose(std::size_t m, double mu, double var) {
  const std::size_t n = rows();
  pending_m_ = m;
  pending_log_c_.resize(n);
  pending_term_.resize(n);
  pending_sum_.resize(n);
  pending_rebuild_.clear();
  double delta = 0.0;
  std::vector<double> scratch;
  for (std::size_t t = 0; t < n; ++t) {
    const double lc = log_normal_pdf(x_[t], mu, var);
    pending_log_c_[t] = lc;
    const double a = log_weights_[m] + lc - shift_[t];
    double new_sum = -1.0;
    if (a < 600.0) {
      const double e = std::exp(a);
      double rest = sum_[t] - terms_(t, m);
      if (rest < 1e-8 * sum_[t]) {
        // removal cancels catastrophically; resum the other terms directly
        rest = 0.0;
        for (std::size_t k = 0; k < cols(); ++k)
          if (k != m) rest += terms_(t, k);
      }
      new_sum = rest + e;
      pending_term_[t] = e;
    }
    if (new_sum > 1e-250) {
      pending_sum_[t] = new_sum;
      delta += std::log(new_sum) - std::log(sum_[t]);
    } else {
      // shift no longer representative for this row; evaluate in log space
      scratch.resize(cols());
      for (std::size_t k = 0; k < cols(); ++k)
        scratch[k] = log_weights_[k] + (k == m ? lc : log_c_(t, k));
      pending_rebuild_.push_back(t);
      pending_sum_[t] = std::numeric_limits<double>::quiet_NaN();
      delta += log_sum_exp(scratch) - log_normalizer(t);
    }
  }
  return delta;
}

void WeightKernelCache::accept() {
  const std::size_t m = pending_m_;
  for (std::size_t t = 0; t < rows(); ++t) {
    log_c_(t, m) = pending_log_c_[t];
    if (!std::isnan(pending_sum_[t])) {
      terms_(t, m) = pending_term_[t];
      sum_[t] = pending_sum_[t];
    }
  }
  for (std::size_t t : pending_rebuild_) rebuild_row(t);
  pending_rebuild_.clear();
}

void WeightKernelCache::reweight(std::span<const double> log_weights) {
  log_weights_.assign(log_weights.begin(), log_weights.end());
  for (std::size_t t = 0; t < rows(); ++t) rebuild_row(t);
}

namespace {

// Tail sums R(t, l) = sum_{m>l} c_{t,m} (1 - zeta_m) prod_{l<s<m} zeta_s, with
// the last component entering as c_{t,L} prod_{l<s<L} zeta_s. Satisfies
// R(t, L-2) = c_{t,L-1} and R(t, l) = c_{t,l+1} (1 - zeta_{l+1}) + zeta_{l+1} R(t, l+1).
Matrix tail_sums(std::span<const double> zeta, const Matrix& c) {
  const std::size_t L = c.cols;
  Matrix R(c.rows, L - 1);
  for (std::size_t t = 0; t < c.rows; ++t) {
    R(t, L - 2) = c(t, L - 1);
    for (std::size_t l = L - 2; l-- > 0;)
      R(t, l) = c(t, l + 1) * (1.0 - zeta[l + 1]) + zeta[l + 1] * R(t, l + 1);
  }
  return R;
}

// w1 = prod_{s<l} zeta_s (R_l - c_l); w0 = P + c_l prod_{s<l} zeta_s, where P
// is the mass of the components before l.
void stick_terms(const Matrix& c, const Matrix& R, std::size_t l, double head,
                 std::span<const double> prefix, StickDecomposition& out) {
  out.w1.resize(c.rows);
  out.w0.resize(c.rows);
  for (std::size_t t = 0; t < c.rows; ++t) {
    out.w1[t] = head * (R(t, l) - c(t, l));
    out.w0[t] = prefix[t] + c(t, l) * head;
  }
}

}  // namespace

StickDecomposition decompose_sticks(std::span<const double> zeta, std::size_t l, const Matrix& c) {
  if (c.cols < 2 || l + 1 >= c.cols) throw DomainError("stick index out of range");
  const Matrix R = tail_sums(zeta, c);
  std::vector<double> prefix(c.rows, 0.0);
  double head = 1.0;
  for (std::size_t s = 0; s < l; ++s) {
    for (std::size_t t = 0; t < c.rows; ++t) prefix[t] += c(t, s) * head * (1.0 - zeta[s]);
    head *= zeta[s];
  }
  StickDecomposition out;
  stick_terms(c, R, l, head, prefix, out);
  return out;
}

Interval admissible_interval(std::span<const double> w1, std::span<const double> w0,
                             std::span<const double> inv_u) {
  Interval iv{0.0, 1.0};
  for (std::size_t t = 0; t < w1.size(); ++t) {
    if (w1[t] == 0.0) continue;
    const double bound = (inv_u[t] - w0[t]) / w1[t];
    if (w1[t] > 0.0)
      iv.hi = std::min(iv.hi, bound);
    else
      iv.lo = std::max(iv.lo, bound);
  }
  return iv;
}

void update_sticks_slice(std::vector<double>& zeta, double alpha,
                         std::span<const std::size_t> counts, const Matrix& log_kernel, Rng& rng,
                         SliceStats& stats) {
  const std::size_t L = log_kernel.cols;
  const std::size_t n = log_kernel.rows;
  if (L < 2) return;

  // Each row is rescaled by its own constant; the slice constraint
  // d_t(zeta) < 1/u_t is invariant to that, since u_t is drawn relative to d_t.
  const auto log_p = log_stick_break(zeta);
  Matrix c(n, L);
  for (std::size_t t = 0; t < n; ++t) {
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < L; ++m)
      shift = std::max(shift, log_kernel(t, m) + std::max(log_p[m], -600.0));
    for (std::size_t m = 0; m < L; ++m) c(t, m) = std::exp(log_kernel(t, m) - shift);
  }

  std::vector<std::size_t> tail(L, 0);
  for (std::size_t l = L - 1; l-- > 0;) tail[l] = tail[l + 1] + counts[l + 1];

  const Matrix R = tail_sums(zeta, c);
  std::vector<double> prefix(n, 0.0);
  std::vector<double> inv_u(n);
  StickDecomposition dec;
  double head = 1.0;
  constexpr double kEdge = 1e-12;

  for (std::size_t l = 0; l + 1 < L; ++l) {
    stick_terms(c, R, l, head, prefix, dec);
    for (std::size_t t = 0; t < n; ++t) {
      const double d = zeta[l] * dec.w1[t] + dec.w0[t];
      inv_u[t] = d / rng.uniform();
    }
    Interval iv = admissible_interval(dec.w1, dec.w0, inv_u);
    iv.lo = std::max(iv.lo, kEdge);
    iv.hi = std::min(iv.hi, 1.0 - kEdge);
    // keep the draw off the exact boundary, where rounding can break the strict inequality
    const double pad = 1e-10 * (iv.hi - iv.lo);
    iv.lo += pad;
    iv.hi -= pad;
    if (!(iv.lo < iv.hi))
      throw NumericalError("empty admissible interval in stick slice update (l = " +
                           std::to_string(l) + ")");

    const double a = alpha + static_cast<double>(tail[l]);
    const double b = static_cast<double>(counts[l]) + 1.0;
    zeta[l] = sample_truncated_beta(a, b, iv.lo, iv.hi, rng);

    ++stats.updates;
    for (std::size_t t = 0; t < n; ++t) {
      ++stats.checks;
      if (!(zeta[l] * dec.w1[t] + dec.w0[t] < inv_u[t])) ++stats.violations;
    }
    assert(stats.violations == 0);

    for (std::size_t t = 0; t < n; ++t) prefix[t] += c(t, l) * head * (1.0 - zeta[l]);
    head *= zeta[l];
  }
}

GammaParams alpha_conditional(double a_alpha, double b_alpha, std::span<const double> zeta) {
  double log_p_last = 0.0;
  for (double z : zeta) log_p_last += std::log(z);
  return {a_alpha + static_cast<double>(zeta.size()), b_alpha - log_p_last};
}

std::vector<std::size_t> occupancy(std::span<const int> labels, std::size_t truncation) {
  std::vector<std::size_t> counts(truncation, 0);
  for (int u : labels) ++counts[static_cast<std::size_t>(u)];
  return counts;
}

}  // namespace dpmts
