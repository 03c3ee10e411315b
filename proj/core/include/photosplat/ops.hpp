#pragma once

#include <array>
#include <vector>

#include "photosplat/tensor.hpp"

namespace photosplat {

// Elementwise binary ops over identical shapes.
TensorPtr add(const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(const TensorPtr& a, const TensorPtr& b);
TensorPtr div(const TensorPtr& a, const TensorPtr& b);

// Scalar broadcast.
TensorPtr add_scalar(const TensorPtr& a, double s);
TensorPtr mul_scalar(const TensorPtr& a, double s);

// [M,K] x [K,N] -> [M,N].
TensorPtr matmul(const TensorPtr& a, const TensorPtr& b);
// [M,N] + [N] row broadcast.
TensorPtr add_rowvec(const TensorPtr& a, const TensorPtr& v);

// Full reductions to a scalar.
TensorPtr sum(const TensorPtr& a);
TensorPtr mean(const TensorPtr& a);

// Elementwise unary ops.
TensorPtr exp(const TensorPtr& a);
TensorPtr sigmoid(const TensorPtr& a);
TensorPtr softplus(const TensorPtr& a);
TensorPtr clamp(const TensorPtr& a, double lo, double hi);
TensorPtr abs(const TensorPtr& a);
TensorPtr sin(const TensorPtr& a);
TensorPtr cos(const TensorPtr& a);

// Column-axis surgery on 2D tensors.
TensorPtr concat_cols(const TensorPtr& a, const TensorPtr& b);
TensorPtr slice_cols(const TensorPtr& a, std::size_t col_begin,
                     std::size_t col_end);

TensorPtr reshape(const TensorPtr& a, std::vector<std::size_t> new_shape);

// [H,W] -> [H,W,C] by replication.
TensorPtr expand_channels(const TensorPtr& a, std::size_t channels);

// Uniform disk-mean filter. A pixel q contributes to p iff the distance
// between their centers is <= radius_px; the kernel is clipped at borders and
// renormalized by the in-bounds count, so constant maps are fixed points.
// Accepts [H,W] or [H,W,C].
TensorPtr disk_conv2d(const TensorPtr& a, double radius_px);

// Separable valid-region convolution of [H,W,C] with a 1D kernel applied
// along both axes. Output is [H-K+1, W-K+1, C]. The kernel is a constant
// (no gradient flows into it).
TensorPtr sep_conv2d_valid(const TensorPtr& a, const std::vector<double>& k);

double sigmoid_scalar(double x);
double softplus_scalar(double x);

// Pixel offsets covered by the disk of the given radius, cached per radius.
const std::vector<std::array<int, 2>>& disk_offsets(double radius_px);

}  // namespace photosplat
