#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library except plain data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace oracle {

inline constexpr std::size_t kQuadPoints = std::size_t{1} << 14;

inline double normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

inline double log_ig_pdf(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

inline double log_gamma_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

/// Composite trapezoid with kQuadPoints nodes on [lo, hi].
inline double integrate(const std::function<double(double)>& f, double lo, double hi,
                        std::size_t points = kQuadPoints) {
  const double h = (hi - lo) / static_cast<double>(points - 1);
  double s = 0.5 * (f(lo) + f(hi));
  for (std::size_t i = 1; i + 1 < points; ++i) s += f(lo + h * static_cast<double>(i));
  return s * h;
}

/// Distribution known up to a constant through its log density, tabulated on
/// a grid and normalized by the trapezoid rule.
class GridDistribution {
 public:
  GridDistribution(const std::function<double(double)>& log_density, double lo, double hi,
                   std::size_t points = kQuadPoints)
      : x_(points), cdf_(points) {
    std::vector<double> ld(points);
    const double h = (hi - lo) / static_cast<double>(points - 1);
    double peak = -INFINITY;
    for (std::size_t i = 0; i < points; ++i) {
      x_[i] = lo + h * static_cast<double>(i);
      ld[i] = log_density(x_[i]);
      peak = std::max(peak, ld[i]);
    }
    cdf_[0] = 0.0;
    for (std::size_t i = 1; i < points; ++i)
      cdf_[i] = cdf_[i - 1] + 0.5 * h * (std::exp(ld[i - 1] - peak) + std::exp(ld[i] - peak));
    const double total = cdf_.back();
    for (auto& c : cdf_) c /= total;
  }

  double cdf(double v) const {
    if (v <= x_.front()) return 0.0;
    if (v >= x_.back()) return 1.0;
    const auto it = std::upper_bound(x_.begin(), x_.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - x_.begin());
    const double w = (v - x_[i - 1]) / (x_[i] - x_[i - 1]);
    return cdf_[i - 1] + w * (cdf_[i] - cdf_[i - 1]);
  }

  double mean() const {
    double m = 0.0;
    for (std::size_t i = 1; i < x_.size(); ++i) m += 0.5 * (x_[i] + x_[i - 1]) * (cdf_[i] - cdf_[i - 1]);
    return m;
  }

 private:
  std::vector<double> x_, cdf_;
};

/// log of the integral over b in [lo, hi] of exp(joint(a, b)), as a function of a.
inline std::function<double(double)> marginal(std::function<double(double, double)> joint, double lo, double hi,
                                              std::size_t points = 1536) {
  return [=](double a) {
    const double h = (hi - lo) / static_cast<double>(points - 1);
    std::vector<double> v(points);
    double peak = -INFINITY;
    for (std::size_t i = 0; i < points; ++i) {
      v[i] = joint(a, lo + h * static_cast<double>(i));
      peak = std::max(peak, v[i]);
    }
    if (!std::isfinite(peak)) return peak;
    double s = 0.0;
    for (std::size_t i = 0; i < points; ++i) s += (i == 0 || i + 1 == points ? 0.5 : 1.0) * std::exp(v[i] - peak);
    return peak + std::log(s * h);
  };
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> sample, const Cdf& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  return d;
}

inline double ks_distance(std::vector<double> sample, const GridDistribution& g) {
  return ks_distance(std::move(sample), [&](double v) { return g.cdf(v); });
}

/// Stick decomposition d_t = zeta_l w1 + w0 written term by term from the
/// product formulas. `l` is 1-based; `c` holds c_{t,1..L} for a single t.
struct W {
  double w1, w0;
};
inline W stick_terms_literal(std::span<const double> zeta, std::size_t l, std::span<const double> c) {
  const std::size_t L = c.size();
  auto z = [&](std::size_t s) { return zeta[s - 1]; };
  auto cc = [&](std::size_t m) { return c[m - 1]; };
  auto prod_skip = [&](std::size_t hi) {  // prod_{s=1, s != l}^{hi} zeta_s
    double p = 1.0;
    for (std::size_t s = 1; s <= hi; ++s)
      if (s != l) p *= z(s);
    return p;
  };
  auto prod = [&](std::size_t hi) {
    double p = 1.0;
    for (std::size_t s = 1; s <= hi; ++s) p *= z(s);
    return p;
  };
  W w{};
  w.w1 = -cc(l) * prod(l - 1);
  for (std::size_t m = l + 1; m <= L - 1; ++m) w.w1 += cc(m) * (1.0 - z(m)) * prod_skip(m - 1);
  w.w1 += cc(L) * prod_skip(L - 1);
  if (l == 1) {
    w.w0 = cc(1);
  } else {
    w.w0 = cc(1) * (1.0 - z(1));
    for (std::size_t s = 2; s <= l - 1; ++s) w.w0 += cc(s) * (1.0 - z(s)) * prod(s - 1);
    w.w0 += cc(l) * prod(l - 1);
  }
  return w;
}

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double variance(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline double third_central_moment(std::span<const double> v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

}  // namespace oracle
