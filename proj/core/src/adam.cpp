#include "photosplat/adam.hpp"

#include <cmath>

#include "photosplat/common.hpp"

namespace photosplat {

void adam_step(const TensorPtr& param, AdamState& state, double lr) {
  require(lr > 0.0, "adam_step: learning rate must be positive, got ", lr);
  const std::size_t n = param->size();
  if (state.m.empty()) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
  }
  require(state.m.size() == n && state.v.size() == n,
          "adam_step: state sized for ", state.m.size(),
          " values but parameter has ", n);

  constexpr double b1 = 0.9;
  constexpr double b2 = 0.999;
  constexpr double eps = 1e-8;

  state.t += 1;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));

  double* p = param->data();
  const double* g = param->grad();
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g[i] * g[i];
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    p[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

}  // namespace photosplat
