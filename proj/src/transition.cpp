#include "dpmts/transition.hpp"

#include <cmath>

#include "dpmts/gaussian.hpp"

namespace dpmts {

double ConditionalMixture::log_density(double z) const {
  std::vector<double> terms(means.size());
  for (std::size_t l = 0; l < terms.size(); ++l)
    terms[l] = log_weights[l] + log_normal_pdf(z, means[l], variances[l]);
  return log_sum_exp(terms);
}

double ConditionalMixture::density(double z) const {
  double f = 0.0;
  for (std::size_t l = 0; l < means.size(); ++l)
    f += std::exp(log_weights[l] + log_normal_pdf(z, means[l], variances[l]));
  return f;
}

double ConditionalMixture::mean() const {
  double m = 0.0;
  for (std::size_t l = 0; l < means.size(); ++l) m += std::exp(log_weights[l]) * means[l];
  return m;
}

double ConditionalMixture::sample(Rng& rng) const {
  const std::size_t l = rng.categorical_log(log_weights);
  return rng.normal(means[l], variances[l]);
}

ConditionalMixture conditional_mixture(const MixtureState& state, double z_prev) {
  const std::size_t L = state.truncation();
  ConditionalMixture out;
  out.log_weights = log_stick_break(state.zeta);
  out.means.resize(L);
  out.variances.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto& eta = state.components[l];
    out.log_weights[l] += log_normal_pdf(z_prev, eta.mu_x, eta.delta_x);
    out.means[l] = eta.mu_y - eta.beta * (z_prev - eta.mu_x);
    out.variances[l] = eta.delta_y;
  }
  const double norm = log_sum_exp(out.log_weights);
  for (double& lw : out.log_weights) lw -= norm;
  return out;
}

}  // namespace dpmts
