#pragma once

#include <span>
#include <vector>

namespace dpmts {

/// Type-7 (linear interpolation) sample quantile of already sorted values.
double quantile_sorted(std::span<const double> sorted, double p);

/// Type-7 sample quantile.
double quantile(std::vector<double> values, double p);

}  // namespace dpmts
