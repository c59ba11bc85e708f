#pragma once

#include <cstddef>
#include <span>

namespace dpmts {

/// Every fixed constant of the hyperprior: normal (mean, variance) for m_x,
/// m_y and theta; inverse-gamma (shape, scale) for v_x, v_y and c; gamma
/// (shape, rate) for s_x, s_y and alpha; the G0 shapes nu_x, nu_y; and the
/// truncation level.
struct HyperpriorConfig {
  double a_m_x = 0.0, b_m_x = 1.0;
  double a_m_y = 0.0, b_m_y = 1.0;
  double a_v_x = 2.0, b_v_x = 1.0;
  double a_v_y = 2.0, b_v_y = 1.0;
  double a_s_x = 2.0, b_s_x = 1.0;
  double a_s_y = 2.0, b_s_y = 1.0;
  double a_theta = 0.0, b_theta = 0.5;
  double a_c = 2.0, b_c = 0.5;
  double nu_x = 2.0, nu_y = 2.0;
  double a_alpha = 0.5, b_alpha = 0.5;
  std::size_t truncation = 30;

  /// Throws DomainError if any scale/shape is non-positive or a_c <= 1.
  void validate() const;
  bool operator==(const HyperpriorConfig&) const = default;
};

/// Rough center and range of the data.
struct DataProxy {
  double center = 0.0;
  double range = 1.0;
};

/// Midrange and range of a series.
DataProxy proxy_from_series(std::span<const double> series);

/// Shapes held fixed by the default recipe. All must exceed 1 so that the
/// corresponding inverse-gamma priors have finite means.
struct PriorShapes {
  double a_v = 2.0;
  double nu = 2.0;
  double a_s = 2.0;
  double a_c = 2.0;

  bool operator==(const PriorShapes&) const = default;
};

/// Default diffuse priors from a data proxy:
///  - beta centered at 0 with b_theta + b_c / (a_c - 1) = 1, split evenly;
///  - mu_x, mu_y centered at d with b_m + b_v / (a_v - 1) = (r/4)^2, split evenly;
///  - E(delta_x) = E(delta_y) = a_s / (b_s (nu - 1)) = (r/4)^2;
///  - alpha ~ Gamma(0.5, 0.5).
HyperpriorConfig default_priors(const DataProxy& proxy, const PriorShapes& shapes = {},
                                std::size_t truncation = 30);

}  // namespace dpmts
