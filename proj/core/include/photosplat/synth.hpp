#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "photosplat/gaussians.hpp"
#include "photosplat/io.hpp"
#include "photosplat/toml.hpp"

namespace photosplat {

// Blob coordinates live in the normalized image frame used everywhere else:
// u = 2x/(W-1) - 1, v = 2y/(H-1) - 1, so corners sit at (+-1, +-1). The
// radius is the sigma of a unit-peak Gaussian bump in those units.
struct ContaminantBlob {
  std::array<double, 2> center{0.0, 0.0};
  double radius = 0.1;
  double attenuation_depth = 0.0;  // in [0,1]; 0 blocks nothing
  std::array<double, 3> emission_color{0.0, 0.0, 0.0};
};

enum class VignetteKind { kNone, kPolynomial };

struct DistortionSpec {
  VignetteKind vignette_kind = VignetteKind::kNone;
  double a2 = 0.0;
  double a4 = 0.0;
  std::vector<ContaminantBlob> blobs;
  double r_coc_px = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

DistortionSpec distortion_spec_from_toml(const TomlDocument& doc);
DistortionSpec distortion_spec_from_file(const std::string& path);
std::string distortion_spec_to_toml(const DistortionSpec& spec);

// V(x) = 1 - a2 r^2 - a4 r^4 with r^2 = (u^2 + v^2)/2, so the corner sits at
// r = 1. Hard error if the polynomial dips to zero or below anywhere.
Image gen_vignette(const DistortionSpec& spec, std::size_t width,
                   std::size_t height);

struct ContaminationMaps {
  Image s_alpha;  // 1 channel, product of (1 - depth * bump), in [0,1]
  Image s_beta;   // 3 channels, sum of emission * bump, >= 0
};

ContaminationMaps gen_contamination(const DistortionSpec& spec,
                                    std::size_t width, std::size_t height);

struct GroundTruthMaps {
  Image vignette;
  Image s_alpha;
  Image s_beta;
};

GroundTruthMaps gen_ground_truth_maps(const DistortionSpec& spec,
                                      std::size_t width, std::size_t height);

// I = V * DiskMean[S_alpha * R + S_beta], clipped to [0,1]. Uses the same
// disk kernel as the camera model so recovery comparisons share one oracle.
Image apply_distortion(const Image& clean, const GroundTruthMaps& maps,
                       double r_coc_px);
Image apply_distortion(const Image& clean, const DistortionSpec& spec);

// Named ground-truth scenes: "boxgrid" (colored Gaussians on a jittered 3D
// grid) and "shell" (Gaussians on a sphere, colored by direction).
GaussianCloud make_preset_cloud(const std::string& name, std::uint64_t seed);

struct OrbitParams {
  std::size_t view_count = 20;
  std::size_t width = 96;
  std::size_t height = 96;
  double fov_deg = 36.0;
  double radius = 3.8;
  double radius_jitter = 0.35;
  double elevation_lo_deg = 5.0;
  double elevation_hi_deg = 55.0;
  double target_jitter = 0.08;
};

// Deterministic ring of inward-looking cameras with seeded elevation/radius
// jitter. World up is +z.
std::vector<CameraView> make_orbit_views(const OrbitParams& params,
                                         std::uint64_t seed);

struct SynthConfig {
  std::string preset = "boxgrid";
  OrbitParams orbit;
  DistortionSpec spec;
  std::array<double, 3> background{0.4, 0.4, 0.4};
  std::uint64_t seed = 7;
};

// Renders the preset through every orbit view, applies the distortion spec,
// and writes the full dataset directory. Fails before writing anything if a
// Gaussian center leaves any view's frustum.
void generate_dataset(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace photosplat
