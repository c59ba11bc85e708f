#include "dpmts/priors.hpp"

#include <algorithm>
#include <cmath>

#include "dpmts/errors.hpp"

namespace dpmts {

void HyperpriorConfig::validate() const {
  const double positive[] = {b_m_x, b_m_y, a_v_x, b_v_x, a_v_y, b_v_y, a_s_x, b_s_x, a_s_y,
                             b_s_y, b_theta, a_c,   b_c,   nu_x,  nu_y,  a_alpha, b_alpha};
  for (double v : positive)
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("hyperprior scales and shapes must be positive");
  if (!std::isfinite(a_m_x) || !std::isfinite(a_m_y) || !std::isfinite(a_theta))
    throw DomainError("hyperprior locations must be finite");
  if (!(a_c > 1.0)) throw DomainError("a_c must exceed 1 so that c has a finite prior mean");
  if (truncation < 1) throw DomainError("truncation level must be at least 1");
}

DataProxy proxy_from_series(std::span<const double> series) {
  if (series.empty()) throw DomainError("empty series");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  return {0.5 * (*lo + *hi), *hi - *lo};
}

HyperpriorConfig default_priors(const DataProxy& proxy, const PriorShapes& shapes,
                                std::size_t truncation) {
  if (!(proxy.range > 0.0)) throw DomainError("range proxy must be positive");
  for (double s : {shapes.a_v, shapes.nu, shapes.a_s, shapes.a_c})
    if (!(s > 1.0)) throw DomainError("prior shapes must exceed 1 for finite inverse-gamma means");

  const double spread = (proxy.range / 4.0) * (proxy.range / 4.0);
  HyperpriorConfig cfg;
  cfg.a_theta = 0.0;
  cfg.b_theta = 0.5;
  cfg.a_c = shapes.a_c;
  cfg.b_c = 0.5 * (shapes.a_c - 1.0);

  cfg.a_m_x = cfg.a_m_y = proxy.center;
  cfg.b_m_x = cfg.b_m_y = 0.5 * spread;
  cfg.a_v_x = cfg.a_v_y = shapes.a_v;
  cfg.b_v_x = cfg.b_v_y = 0.5 * spread * (shapes.a_v - 1.0);

  cfg.nu_x = cfg.nu_y = shapes.nu;
  cfg.a_s_x = cfg.a_s_y = shapes.a_s;
  cfg.b_s_x = cfg.b_s_y = shapes.a_s / (spread * (shapes.nu - 1.0));

  cfg.a_alpha = 0.5;
  cfg.b_alpha = 0.5;
  cfg.truncation = truncation;
  return cfg;
}

}  // namespace dpmts
