#include "dpmts/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "dpmts/errors.hpp"

namespace dpmts {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() {
  // 53 random bits, shifted by half a unit so neither 0 nor 1 can occur.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::standard_normal() { return normal_(engine_); }

double Rng::normal(double mean, double variance) {
  return mean + std::sqrt(variance) * normal_(engine_);
}

double Rng::gamma(double shape, double rate) {
  using P = std::gamma_distribution<double>::param_type;
  return gamma_(engine_, P(shape, 1.0 / rate));
}

double Rng::inverse_gamma(double shape, double scale) { return 1.0 / gamma(shape, scale); }

double Rng::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  return x / (x + y);
}

std::size_t Rng::categorical_log(std::span<const double> log_weights) {
  const double hi = *std::max_element(log_weights.begin(), log_weights.end());
  double total = 0.0;
  for (double lw : log_weights) total += std::exp(lw - hi);
  double target = uniform() * total;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    target -= std::exp(log_weights[i] - hi);
    if (target <= 0.0) return i;
  }
  // Rounding left a sliver of mass; return the last index with positive weight.
  for (std::size_t i = log_weights.size(); i-- > 0;)
    if (std::isfinite(log_weights[i])) return i;
  throw NumericalError("categorical_log: no finite weight");
}

std::string Rng::serialize() const {
  std::ostringstream os;
  os << engine_ << ' ' << normal_ << ' ' << gamma_;
  return os.str();
}

Rng Rng::deserialize(const std::string& text) {
  Rng rng;
  std::istringstream is(text);
  is >> rng.engine_ >> rng.normal_ >> rng.gamma_;
  if (!is) throw ValidationError("corrupt random generator state");
  return rng;
}

bool Rng::operator==(const Rng& other) const {
  return engine_ == other.engine_ && normal_ == other.normal_ && gamma_ == other.gamma_;
}

namespace {

double beta_log_kernel(double a, double b, double x) {
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x);
}

// Bisection on the CDF of the truncated density obtained by adaptive
// quadrature. Slow; kept for intervals touching 0 or 1 where the kernel is singular.
double quadrature_quantile(double a, double b, double lo, double hi, double u) {
  double peak = std::max(beta_log_kernel(a, b, lo), beta_log_kernel(a, b, hi));
  if (a > 1.0 && b > 1.0) {
    const double mode = std::clamp((a - 1.0) / (a + b - 2.0), lo, hi);
    peak = std::max(peak, beta_log_kernel(a, b, mode));
  }
  auto density = [&](double x) { return std::exp(beta_log_kernel(a, b, x) - peak); };
  using Quad = boost::math::quadrature::gauss_kronrod<double, 31>;
  const double total = Quad::integrate(density, lo, hi, 15, 1e-12);
  if (!(total > 0.0)) return lo + u * (hi - lo);
  const double target = u * total;
  double left = lo, right = hi;
  for (int it = 0; it < 80 && right - left > 1e-15 * std::max(1.0, right); ++it) {
    const double mid = 0.5 * (left + right);
    if (Quad::integrate(density, lo, mid, 15, 1e-12) < target)
      left = mid;
    else
      right = mid;
  }
  return 0.5 * (left + right);
}

// Inverse CDF of the log kernel interpolated linearly between equally spaced
// nodes, each segment integrated and inverted in closed form. Bins aim at a
// kernel change of about 0.05 each. NaN if the table degenerates.
double tabulated_quantile(double a, double b, double lo, double hi, double u) {
  auto slope = [&](double x) { return (a - 1.0) / x - (b - 1.0) / (1.0 - x); };
  if (a >= 1.0 && b >= 1.0) {
    // Concave log kernel: it stays below the tangent at the higher end, so
    // anything more than kNats below the peak is dropped.
    constexpr double kNats = 45.0;
    const double s_lo = slope(lo), s_hi = slope(hi);
    if (s_hi > 0.0)
      lo = std::max(lo, hi - kNats / s_hi);
    else if (s_lo < 0.0)
      hi = std::min(hi, lo - kNats / s_lo);
  }
  const double slope_bound = a >= 1.0 && b >= 1.0 ? std::max(std::abs(slope(lo)), std::abs(slope(hi)))
                                                  : std::abs(a - 1.0) / lo + std::abs(b - 1.0) / (1.0 - hi);
  const double want = std::ceil(20.0 * slope_bound * (hi - lo));
  const std::size_t n = static_cast<std::size_t>(std::clamp(want, 1024.0, 65536.0));
  const double h = (hi - lo) / static_cast<double>(n);
  std::vector<double> k(n + 1), e(n + 1);
  for (std::size_t i = 0; i <= n; ++i) k[i] = beta_log_kernel(a, b, i == n ? hi : lo + h * static_cast<double>(i));
  const double peak = *std::max_element(k.begin(), k.end());
  for (std::size_t i = 0; i <= n; ++i) e[i] = std::exp(k[i] - peak);
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = k[i + 1] - k[i];
    cum[i + 1] = cum[i] + (std::abs(d) < 1e-8 ? h * e[i] * (1.0 + 0.5 * d) : h * (e[i + 1] - e[i]) / d);
  }
  if (!(cum[n] > 0.0 && std::isfinite(cum[n]))) return std::numeric_limits<double>::quiet_NaN();
  const double target = u * cum[n];
  const auto pos = std::upper_bound(cum.begin(), cum.end(), target) - cum.begin();
  const std::size_t i = std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::max<std::ptrdiff_t>(pos, 1) - 1));
  const double r = target - cum[i], d = k[i + 1] - k[i];
  double s;
  if (std::abs(d) < 1e-8) {
    s = e[i] > 0.0 ? r / (h * e[i]) : 0.5;
  } else {
    // exp(k_i - peak + d s) = e_i + r d / h, solved in logs so neither side overflows.
    const double arg = e[i] + r * d / h;
    s = arg > 0.0 ? (std::log(arg) - (k[i] - peak)) / d : 1.0;
  }
  return lo + h * (static_cast<double>(i) + std::clamp(s, 0.0, 1.0));
}

}  // namespace

double truncated_beta_quantile(double a, double b, double lo, double hi, double u) {
  if (!(a > 0.0 && b > 0.0)) throw DomainError("truncated beta: shape parameters must be positive");
  if (!(0.0 <= lo && lo < hi && hi <= 1.0)) throw DomainError("truncated beta: need 0 <= lo < hi <= 1");
  namespace bm = boost::math;
  // Relative interval mass below which the uniform-to-quantile map loses too
  // many digits to the subtraction of the two tail probabilities.
  constexpr double kMinRelativeMass = 1e-8;
  try {
    const double flo = bm::ibeta(a, b, lo);
    double x = std::numeric_limits<double>::quiet_NaN();
    if (flo < 0.5) {
      const double fhi = bm::ibeta(a, b, hi);
      const double mass = fhi - flo;
      if (mass > 0.0 && mass > kMinRelativeMass * fhi) x = bm::ibeta_inv(a, b, flo + u * mass);
    } else {
      const double qlo = bm::ibetac(a, b, lo);
      const double qhi = bm::ibetac(a, b, hi);
      const double mass = qlo - qhi;
      if (mass > 0.0 && mass > kMinRelativeMass * qlo) x = bm::ibetac_inv(a, b, qlo - u * mass);
    }
    if (std::isfinite(x)) {
      const double slack = 1e-12 * (hi - lo);
      if (x >= lo - slack && x <= hi + slack) return std::clamp(x, lo, hi);
    }
  } catch (const std::exception&) {
    // fall through to the numerical routes below
  }
  if (lo > 0.0 && hi < 1.0) {
    const double x = tabulated_quantile(a, b, lo, hi, u);
    if (std::isfinite(x)) return std::clamp(x, lo, hi);
  }
  return quadrature_quantile(a, b, lo, hi, u);
}

double sample_truncated_beta(double a, double b, double lo, double hi, Rng& rng) {
  return truncated_beta_quantile(a, b, lo, hi, rng.uniform());
}

}  // namespace dpmts
