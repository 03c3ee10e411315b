#pragma once

#include <cstdint>
#include <string>

#include "photosplat/io.hpp"
#include "photosplat/tensor.hpp"

namespace photosplat {

struct CameraSettings {
  std::size_t encoding_freqs = 4;       // L in the positional encoding
  std::size_t hidden_width = 32;
  std::size_t attenuation_channels = 1; // 1 achromatic or 3 per-channel
  double r_coc_px = 0.0;

  std::size_t encoded_dim() const { return 2 * (1 + 2 * encoding_freqs); }
  void validate() const;
};

struct Mlp {
  TensorPtr w1, b1, w2, b2, w3, b3;
  std::vector<TensorPtr> params() const { return {w1, b1, w2, b2, w3, b3}; }
};

// Two heads over pixel position: the internal head yields the attenuation
// map (sensor response folded into vignetting), the external head yields the
// contamination attenuation and emission maps.
struct PhotometricCamera {
  CameraSettings settings;
  Mlp internal;  // attenuation_channels sigmoid outputs
  Mlp external;  // attenuation_channels sigmoid + 3 softplus outputs

  std::vector<TensorPtr> params() const;
  void set_requires_grad(bool rg);
  void zero_grad();
};

struct DefocusParams {
  double focal_length = 0;       // meters
  double aperture_diameter = 0;  // meters
  double focus_distance = 0;     // meters
  double object_distance = 0;    // meters
  double pixel_pitch = 0;        // meters per pixel
};

// Offline helper for choosing r_coc_px; training reads the radius from
// config directly.
double coc_radius(const DefocusParams& params);

// Hidden layers get small seeded random weights; final layers start at zero
// with biases chosen so the camera is a near-identity: sigmoid heads open at
// ~0.995, softplus heads emit under 1e-3.
PhotometricCamera init_identity(const CameraSettings& settings,
                                std::uint64_t seed);

struct CameraMaps {
  TensorPtr attenuation;  // [H,W] or [H,W,3]
  TensorPtr beta;         // [H,W] or [H,W,3]
  TensorPtr gamma;        // [H,W,3]
};

// Differentiable w.r.t. the MLP weights; pure in the pixel grid.
CameraMaps eval_maps(const PhotometricCamera& camera, std::size_t width,
                     std::size_t height);

// I(x) = A(x) * DiskMean[Beta * R + Gamma](x).
TensorPtr apply_with_maps(const CameraMaps& maps, double r_coc_px,
                          const TensorPtr& radiance);
TensorPtr apply(const PhotometricCamera& camera, const TensorPtr& radiance);

Checkpoint camera_to_checkpoint(const PhotometricCamera& camera);
PhotometricCamera camera_from_checkpoint(const Checkpoint& ckpt);

struct DistortionMaps {
  Image attenuation;
  Image beta_blurred;
  Image gamma;
  Image effective;      // camera applied to an all-ones image
  double gamma_v_max = 1.0;
  double effective_v_max = 1.0;
};

// Maps are scaled into [0,1] by their recorded v_max before quantization.
DistortionMaps render_distortion_maps(const PhotometricCamera& camera,
                                      std::size_t width, std::size_t height);
void write_distortion_maps(const DistortionMaps& maps,
                           const std::string& out_dir, double r_coc_px);

}  // namespace photosplat
