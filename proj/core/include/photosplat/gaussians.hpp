#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "photosplat/tensor.hpp"

namespace photosplat {

struct CameraView {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  std::size_t width = 0, height = 0;
  std::array<double, 16> world_to_camera{};  // row-major 4x4

  void validate() const;
};

// Camera axes: +x right, +y along world up projected into the image, +z
// forward. Pixel centers sit at integer coordinates.
CameraView make_look_at(const std::array<double, 3>& eye,
                        const std::array<double, 3>& target,
                        const std::array<double, 3>& up, double fx, double fy,
                        std::size_t width, std::size_t height);

// Scene parameters live as leaf tensors so the render backward can reach
// them. Opacities are sigmoid(opacity_logits), colors sigmoid(color_logits).
struct GaussianCloud {
  TensorPtr centers;         // [N,3]
  TensorPtr log_scales;      // [N,3]
  TensorPtr rotations;       // [N,4] quaternions, normalized on use
  TensorPtr opacity_logits;  // [N]
  TensorPtr color_logits;    // [N,3]

  static GaussianCloud create(std::size_t n);
  std::size_t size() const { return centers ? centers->dim(0) : 0; }
  void set_requires_grad(bool rg);
  void zero_grad();
  std::vector<TensorPtr> params() const;
};

struct RenderOptions {
  std::array<double, 3> background{0.0, 0.0, 0.0};
  double z_near = 0.01;
  double alpha_clamp = 0.99;
  double transmittance_min = 1e-4;
  double cov2d_floor = 0.3;  // px^2, added isotropically
  double sigma_min = 1e-4;   // inverse-depth units
  // Pixels with -log contribution above this bound are outside the splat's
  // raster box. exp(-41.45) ~ 1e-18, far below compositing tolerances.
  double prune_power = 41.45;
};

struct ProjectedGaussian {
  std::size_t index = 0;
  double mean_x = 0, mean_y = 0;
  double cov_a = 0, cov_b = 0, cov_c = 0;  // floored 2D covariance
  double conic_a = 0, conic_b = 0, conic_c = 0;
  double depth = 0;
  double inv_depth = 0;
  int x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;  // inclusive raster box
};

// Culls Gaussians behind z_near and those whose raster box misses the image.
// Output order follows cloud order.
std::vector<ProjectedGaussian> project_gaussians(const GaussianCloud& cloud,
                                                 const CameraView& view,
                                                 const RenderOptions& opts);

struct DepthStats {
  std::size_t width = 0, height = 0;
  std::vector<double> mu_id;     // 0 where uncovered
  std::vector<double> sigma_id;  // >= sigma_min where covered
  std::vector<std::uint8_t> covered;
};

struct RenderResult {
  TensorPtr image;  // [H,W,3]
  DepthStats depth;
};

RenderResult render(const GaussianCloud& cloud, const CameraView& view,
                    const RenderOptions& opts);

// Color terms reweighted by the inverse-depth Gaussian of the supplied
// stats; the transmittance product keeps the unmodified alphas. Forward
// only: the result feeds camera-side optimization as a constant.
TensorPtr render_depth_regularized(const GaussianCloud& cloud,
                                   const CameraView& view,
                                   const DepthStats& stats,
                                   const RenderOptions& opts);

}  // namespace photosplat
