#pragma once

#include <array>
#include <string>
#include <vector>

#include "photosplat/gaussians.hpp"
#include "photosplat/io.hpp"
#include "photosplat/synth.hpp"

namespace photosplat {

struct DatasetGroundTruth {
  std::vector<Image> clean;  // per view, same order as the observations
  Image vignette;            // 1 channel
  Image s_alpha;             // 1 channel
  Image s_beta;              // 3 channels
  DistortionSpec spec;
  std::array<double, 3> background{0.0, 0.0, 0.0};
};

// Posed multi-view observations. Views whose index is a multiple of
// test_stride are held out for evaluation.
struct Dataset {
  std::size_t width = 0, height = 0;
  double fx = 0, fy = 0, cx = 0, cy = 0;
  std::vector<CameraView> views;
  std::vector<Image> images;  // distorted observations
  std::size_t test_stride = 5;
  bool has_gt = false;
  DatasetGroundTruth gt;

  std::vector<std::size_t> train_indices() const;
  std::vector<std::size_t> test_indices() const;
};

// Writes manifest.json, images/%04d.png, clean/%04d.png, gt maps, spec.toml
// and gt/cloud.ckpt under out_dir. Ground-truth maps are regenerated from
// the spec at the image resolution.
void write_dataset(const GaussianCloud& cloud,
                   const std::vector<CameraView>& views,
                   const std::vector<Image>& clean,
                   const std::vector<Image>& distorted,
                   const DistortionSpec& spec,
                   const std::array<double, 3>& background,
                   const std::string& out_dir);

// Verifies checksums and decodes everything up front; missing files,
// checksum mismatches, and manifest problems each fail with their own
// message.
Dataset load_dataset(const std::string& dir);

Checkpoint cloud_to_checkpoint(const GaussianCloud& cloud,
                               std::uint64_t iteration);
GaussianCloud cloud_from_checkpoint(const Checkpoint& ckpt);

}  // namespace photosplat
