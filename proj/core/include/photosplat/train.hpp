#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "photosplat/adam.hpp"
#include "photosplat/camera.hpp"
#include "photosplat/dataset.hpp"
#include "photosplat/metrics.hpp"
#include "photosplat/random.hpp"
#include "photosplat/toml.hpp"

namespace photosplat {

struct TrainConfig {
  std::size_t total_blocks = 30;
  std::size_t scene_steps_per_block = 50;
  std::size_t camera_steps_per_block = 20;
  std::size_t n_gaussians = 300;
  double lr_scene_centers = 1.6e-3;
  double lr_scene_scales = 5e-3;
  double lr_scene_rotations = 2e-3;
  double lr_scene_opacity = 2.5e-2;
  double lr_scene_color = 1e-2;
  double lr_camera = 1e-3;
  double lambda_ssim = 0.2;
  double sigma_min = 1e-4;
  double r_coc_px = 0.0;
  std::array<double, 3> background{0.4, 0.4, 0.4};
  std::uint64_t seed = 1;
  bool camera_enabled = true;
  bool depth_reg_enabled = false;
  bool defocus_enabled = true;
  std::size_t encoding_freqs = 4;
  std::size_t hidden_width = 32;
  std::size_t attenuation_channels = 1;

  void validate() const;
  CameraSettings camera_settings() const;
  RenderOptions render_options() const;
};

// Keys mirror the field names; background is a 3-value list. Missing keys
// keep their defaults.
TrainConfig train_config_from_toml(const TomlDocument& doc);
TrainConfig train_config_from_file(const std::string& path);
std::string train_config_to_toml(const TrainConfig& config);

// Round-robin over a fixed index set, reshuffled per pass from its own
// stream.
class ViewCycler {
 public:
  ViewCycler() : rng_(0) {}
  ViewCycler(std::vector<std::size_t> indices, Rng rng);
  std::size_t next();

 private:
  void reshuffle();
  std::vector<std::size_t> indices_;
  std::size_t pos_ = 0;
  Rng rng_;
};

struct TrainerState {
  GaussianCloud scene;
  PhotometricCamera camera;
  std::vector<AdamState> scene_opt;   // aligned with scene.params()
  std::vector<AdamState> camera_opt;  // aligned with camera.params()
  ViewCycler camera_views;
  ViewCycler scene_views;
  std::vector<TensorPtr> observed;  // dataset images as constant tensors
};

GaussianCloud init_scene(const TrainConfig& config, Rng rng);
TrainerState make_trainer(const Dataset& dataset, const TrainConfig& config);

// FNV-1a over the raw parameter bytes; used to assert phase freezing.
std::uint64_t params_checksum(const std::vector<TensorPtr>& params);

// One camera phase: camera_steps_per_block updates of the camera weights
// against per-view targets, scene frozen (checksummed). The regularized
// render is cached per view for the whole phase. Returns the mean loss.
double camera_phase(TrainerState& state, const Dataset& dataset,
                    const TrainConfig& config);

// One scene phase: scene_steps_per_block updates of the scene through the
// frozen camera (checksummed). Returns the mean loss.
double scene_phase(TrainerState& state, const Dataset& dataset,
                   const TrainConfig& config);

// Renders the listed views and scores them against the observations and,
// when present, the ground truth (clean renders, attenuation map up to
// scale, emission localization).
EvalReport evaluate(const Dataset& dataset, const GaussianCloud& scene,
                    const PhotometricCamera& camera, const TrainConfig& config,
                    const std::vector<std::size_t>& view_indices);

struct TrainResult {
  GaussianCloud scene;
  PhotometricCamera camera;
  std::string metrics_csv;
  EvalReport final_eval;  // over the test views; empty when there are none
};

// Warmup of round(0.2 * total_blocks) scene-only blocks, then total_blocks
// blocks of camera phase followed by scene phase. When out_dir is non-empty
// writes scene.ckpt, camera.ckpt and metrics.csv there.
TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const std::string& out_dir);

}  // namespace photosplat
