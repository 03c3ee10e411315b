#pragma once

#include <cstdint>
#include <vector>

#include "photosplat/tensor.hpp"

namespace photosplat {

// Per-parameter moment accumulators for the adaptive update. Moments are
// sized lazily on the first step and never reset implicitly.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::int64_t t = 0;
};

// One bias-corrected adaptive moment update of `param` from param->grad().
// beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
void adam_step(const TensorPtr& param, AdamState& state, double lr);

}  // namespace photosplat
