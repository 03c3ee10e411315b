#pragma once

#include <vector>

#include "photosplat/ops.hpp"

namespace photosplat {

// Normalized 1D Gaussian taps used as the separable SSIM window.
std::vector<double> gaussian_window(std::size_t size, double sigma);

// (1 - SSIM(a, b)) / 2, averaged over channels and valid window positions.
// 11x11 Gaussian window, sigma 1.5, C1 = 0.01^2, C2 = 0.03^2. Differentiable
// through both arguments. Accepts [H,W] or [H,W,C]; both must be at least
// the window size.
TensorPtr dssim(const TensorPtr& a, const TensorPtr& b);

// (1 - lambda) * mean|pred - target| + lambda * dssim(pred, target).
TensorPtr photometric_loss(const TensorPtr& pred, const TensorPtr& target,
                           double lambda);

}  // namespace photosplat
