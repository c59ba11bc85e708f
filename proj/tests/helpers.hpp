#pragma once

#include <random>
#include <vector>

#include "dpmts/model.hpp"

namespace testing_helpers {

/// Random mixture state with L components, spread-out means and moderate variances.
inline dpmts::MixtureState random_state(std::size_t L, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> loc(-5.0, 5.0), var(0.2, 3.0), slope(-1.5, 1.5), stick(0.05, 0.95);
  dpmts::MixtureState s;
  s.components.resize(L);
  for (auto& c : s.components) c = {loc(gen), loc(gen), slope(gen), var(gen), var(gen)};
  std::vector<double> zeta(L - 1);
  for (auto& z : zeta) z = stick(gen);
  s.set_sticks(zeta);
  s.alpha = 1.0;
  return s;
}

inline dpmts::MixtureState single(const dpmts::ComponentParams& c) {
  dpmts::MixtureState s;
  s.components = {c};
  s.set_sticks({});
  return s;
}

}  // namespace testing_helpers
