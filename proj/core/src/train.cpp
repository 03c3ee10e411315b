#include "photosplat/train.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <unordered_map>

#include "photosplat/common.hpp"
#include "photosplat/loss.hpp"
#include "photosplat/ops.hpp"

namespace photosplat {

namespace {

std::string csv_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_psnr(const Psnr& p) {
  return p.infinite ? "inf" : csv_number(p.db);
}

// Channel-mean [H,W] image from an [H,W] or [H,W,C] tensor.
Image flatten_channels(const Tensor& t) {
  const std::size_t h = t.dim(0), w = t.dim(1);
  const std::size_t c = t.rank() == 3 ? t.dim(2) : 1;
  Image out(w, h, 1);
  for (std::size_t i = 0; i < w * h; ++i) {
    double acc = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) acc += t.at(i * c + ch);
    out.pixels[i] = acc / static_cast<double>(c);
  }
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  require(n_gaussians >= 1, "train config: n_gaussians must be >= 1");
  for (double lr : {lr_scene_centers, lr_scene_scales, lr_scene_rotations,
                    lr_scene_opacity, lr_scene_color, lr_camera})
    require(lr > 0.0, "train config: learning rates must be positive");
  require(lambda_ssim >= 0.0 && lambda_ssim <= 1.0,
          "train config: lambda_ssim outside [0,1]");
  require(sigma_min > 0.0, "train config: sigma_min must be positive");
  require(r_coc_px >= 0.0, "train config: r_coc_px must be >= 0");
  require(attenuation_channels == 1 || attenuation_channels == 3,
          "train config: attenuation_channels must be 1 or 3");
  require(hidden_width >= 1, "train config: hidden_width must be >= 1");
  for (double b : background)
    require(b >= 0.0 && b <= 1.0, "train config: background outside [0,1]");
}

CameraSettings TrainConfig::camera_settings() const {
  CameraSettings settings;
  settings.encoding_freqs = encoding_freqs;
  settings.hidden_width = hidden_width;
  settings.attenuation_channels = attenuation_channels;
  settings.r_coc_px = defocus_enabled ? r_coc_px : 0.0;
  return settings;
}

RenderOptions TrainConfig::render_options() const {
  RenderOptions opts;
  opts.background = background;
  opts.sigma_min = sigma_min;
  return opts;
}

TrainConfig train_config_from_toml(const TomlDocument& doc) {
  TrainConfig cfg;
  cfg.total_blocks =
      static_cast<std::size_t>(doc.integer_or("total_blocks", 30));
  cfg.scene_steps_per_block =
      static_cast<std::size_t>(doc.integer_or("scene_steps_per_block", 50));
  cfg.camera_steps_per_block =
      static_cast<std::size_t>(doc.integer_or("camera_steps_per_block", 20));
  cfg.n_gaussians = static_cast<std::size_t>(doc.integer_or("n_gaussians", 300));
  cfg.lr_scene_centers = doc.number_or("lr_scene_centers", cfg.lr_scene_centers);
  cfg.lr_scene_scales = doc.number_or("lr_scene_scales", cfg.lr_scene_scales);
  cfg.lr_scene_rotations =
      doc.number_or("lr_scene_rotations", cfg.lr_scene_rotations);
  cfg.lr_scene_opacity = doc.number_or("lr_scene_opacity", cfg.lr_scene_opacity);
  cfg.lr_scene_color = doc.number_or("lr_scene_color", cfg.lr_scene_color);
  cfg.lr_camera = doc.number_or("lr_camera", cfg.lr_camera);
  cfg.lambda_ssim = doc.number_or("lambda_ssim", cfg.lambda_ssim);
  cfg.sigma_min = doc.number_or("sigma_min", cfg.sigma_min);
  cfg.r_coc_px = doc.number_or("r_coc_px", cfg.r_coc_px);
  auto bg = doc.list_or("background",
                        {cfg.background[0], cfg.background[1], cfg.background[2]});
  require(bg.size() == 3, "train config: background needs 3 values");
  cfg.background = {bg[0], bg[1], bg[2]};
  cfg.seed = static_cast<std::uint64_t>(doc.integer_or("seed", 1));
  cfg.camera_enabled = doc.boolean_or("camera_enabled", cfg.camera_enabled);
  cfg.depth_reg_enabled =
      doc.boolean_or("depth_reg_enabled", cfg.depth_reg_enabled);
  cfg.defocus_enabled = doc.boolean_or("defocus_enabled", cfg.defocus_enabled);
  cfg.encoding_freqs =
      static_cast<std::size_t>(doc.integer_or("encoding_freqs", 4));
  cfg.hidden_width = static_cast<std::size_t>(doc.integer_or("hidden_width", 32));
  cfg.attenuation_channels =
      static_cast<std::size_t>(doc.integer_or("attenuation_channels", 1));
  cfg.validate();
  return cfg;
}

TrainConfig train_config_from_file(const std::string& path) {
  return train_config_from_toml(toml_parse_file(path));
}

std::string train_config_to_toml(const TrainConfig& config) {
  std::string out;
  auto num = [&](const std::string& key, double v) {
    out += key + " = " + csv_number(v) + "\n";
  };
  auto count = [&](const std::string& key, std::size_t v) {
    out += key + " = " + std::to_string(v) + "\n";
  };
  auto flag = [&](const std::string& key, bool v) {
    out += key + std::string(" = ") + (v ? "true" : "false") + "\n";
  };
  count("total_blocks", config.total_blocks);
  count("scene_steps_per_block", config.scene_steps_per_block);
  count("camera_steps_per_block", config.camera_steps_per_block);
  count("n_gaussians", config.n_gaussians);
  num("lr_scene_centers", config.lr_scene_centers);
  num("lr_scene_scales", config.lr_scene_scales);
  num("lr_scene_rotations", config.lr_scene_rotations);
  num("lr_scene_opacity", config.lr_scene_opacity);
  num("lr_scene_color", config.lr_scene_color);
  num("lr_camera", config.lr_camera);
  num("lambda_ssim", config.lambda_ssim);
  num("sigma_min", config.sigma_min);
  num("r_coc_px", config.r_coc_px);
  out += "background = [" + csv_number(config.background[0]) + ", " +
         csv_number(config.background[1]) + ", " +
         csv_number(config.background[2]) + "]\n";
  count("seed", static_cast<std::size_t>(config.seed));
  flag("camera_enabled", config.camera_enabled);
  flag("depth_reg_enabled", config.depth_reg_enabled);
  flag("defocus_enabled", config.defocus_enabled);
  count("encoding_freqs", config.encoding_freqs);
  count("hidden_width", config.hidden_width);
  count("attenuation_channels", config.attenuation_channels);
  return out;
}

ViewCycler::ViewCycler(std::vector<std::size_t> indices, Rng rng)
    : indices_(std::move(indices)), rng_(rng) {
  require(!indices_.empty(), "view cycler: empty index set");
  reshuffle();
}

void ViewCycler::reshuffle() {
  for (std::size_t i = indices_.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(
        rng_.uniform_int(0, static_cast<int>(i) - 1));
    std::swap(indices_[i - 1], indices_[j]);
  }
  pos_ = 0;
}

std::size_t ViewCycler::next() {
  require(!indices_.empty(), "view cycler: empty index set");
  if (pos_ == indices_.size()) reshuffle();
  return indices_[pos_++];
}

GaussianCloud init_scene(const TrainConfig& config, Rng rng) {
  auto cloud = GaussianCloud::create(config.n_gaussians);
  const double opacity_logit = std::log(0.1 / 0.9);
  for (std::size_t g = 0; g < config.n_gaussians; ++g) {
    for (std::size_t a = 0; a < 3; ++a) {
      cloud.centers->set(g * 3 + a, rng.uniform(-0.8, 0.8));
      cloud.log_scales->set(g * 3 + a, std::log(rng.uniform(0.08, 0.16)));
      cloud.color_logits->set(g * 3 + a, 0.0);
    }
    cloud.opacity_logits->set(g, opacity_logit);
  }
  return cloud;
}

TrainerState make_trainer(const Dataset& dataset, const TrainConfig& config) {
  config.validate();
  require(!dataset.views.empty(), "train: dataset has no views");
  auto train_idx = dataset.train_indices();
  require(!train_idx.empty(), "train: no training views after the split");

  Rng root(config.seed);
  TrainerState state;
  state.scene = init_scene(config, root.fork(1));
  state.camera = init_identity(config.camera_settings(), config.seed + 1);
  state.scene_opt.resize(state.scene.params().size());
  state.camera_opt.resize(state.camera.params().size());
  state.camera_views = ViewCycler(train_idx, root.fork(2));
  state.scene_views = ViewCycler(train_idx, root.fork(3));
  state.observed.reserve(dataset.images.size());
  for (const auto& img : dataset.images)
    state.observed.push_back(image_to_tensor(img));
  return state;
}

std::uint64_t params_checksum(const std::vector<TensorPtr>& params) {
  std::uint64_t hash = 1469598103934665603ull;
  for (const auto& p : params) {
    const auto* bytes =
        reinterpret_cast<const unsigned char*>(p->values().data());
    for (std::size_t i = 0; i < p->size() * sizeof(double); ++i) {
      hash ^= bytes[i];
      hash *= 1099511628211ull;
    }
  }
  return hash;
}

double camera_phase(TrainerState& state, const Dataset& dataset,
                    const TrainConfig& config) {
  require(config.camera_enabled, "camera_phase: camera model is disabled");
  if (config.camera_steps_per_block == 0) return 0.0;

  const auto scene_before = params_checksum(state.scene.params());
  state.scene.set_requires_grad(false);
  state.camera.set_requires_grad(true);
  const auto opts = config.render_options();
  auto camera_params = state.camera.params();

  std::unordered_map<std::size_t, TensorPtr> targets;
  double total = 0.0;
  for (std::size_t step = 0; step < config.camera_steps_per_block; ++step) {
    const std::size_t idx = state.camera_views.next();
    auto found = targets.find(idx);
    if (found == targets.end()) {
      auto rr = render(state.scene, dataset.views[idx], opts);
      auto reg = config.depth_reg_enabled
                     ? render_depth_regularized(state.scene,
                                                dataset.views[idx], rr.depth,
                                                opts)
                     : rr.image;
      found = targets.emplace(idx, std::move(reg)).first;
    }
    Tape tape;
    TapeGuard guard(tape);
    auto pred = photosplat::apply(state.camera, found->second);
    auto loss = photometric_loss(pred, state.observed[idx], config.lambda_ssim);
    backward(tape, loss);
    for (std::size_t i = 0; i < camera_params.size(); ++i)
      adam_step(camera_params[i], state.camera_opt[i], config.lr_camera);
    state.camera.zero_grad();
    total += loss->at(0);
  }
  require(params_checksum(state.scene.params()) == scene_before,
          "camera_phase: scene parameters changed");
  return total / static_cast<double>(config.camera_steps_per_block);
}

double scene_phase(TrainerState& state, const Dataset& dataset,
                   const TrainConfig& config) {
  if (config.scene_steps_per_block == 0) return 0.0;

  const auto camera_before = params_checksum(state.camera.params());
  state.scene.set_requires_grad(true);
  state.camera.set_requires_grad(false);
  const auto opts = config.render_options();
  auto scene_params = state.scene.params();
  const double lrs[5] = {config.lr_scene_centers, config.lr_scene_scales,
                         config.lr_scene_rotations, config.lr_scene_opacity,
                         config.lr_scene_color};

  double total = 0.0;
  for (std::size_t step = 0; step < config.scene_steps_per_block; ++step) {
    const std::size_t idx = state.scene_views.next();
    Tape tape;
    TapeGuard guard(tape);
    auto rendered = render(state.scene, dataset.views[idx], opts).image;
    auto pred = config.camera_enabled ? photosplat::apply(state.camera, rendered)
                                      : rendered;
    auto loss = photometric_loss(pred, state.observed[idx], config.lambda_ssim);
    backward(tape, loss);
    for (std::size_t i = 0; i < scene_params.size(); ++i)
      adam_step(scene_params[i], state.scene_opt[i], lrs[i]);
    state.scene.zero_grad();
    state.camera.zero_grad();
    total += loss->at(0);
  }
  require(params_checksum(state.camera.params()) == camera_before,
          "scene_phase: camera parameters changed");
  return total / static_cast<double>(config.scene_steps_per_block);
}

EvalReport evaluate(const Dataset& dataset, const GaussianCloud& scene,
                    const PhotometricCamera& camera, const TrainConfig& config,
                    const std::vector<std::size_t>& view_indices) {
  EvalReport report;
  report.has_clean = dataset.has_gt;
  const auto opts = config.render_options();
  for (std::size_t idx : view_indices) {
    require(idx < dataset.views.size(), "evaluate: view index ", idx,
            " out of range");
    auto clean_render = render(scene, dataset.views[idx], opts).image;
    auto pred = config.camera_enabled ? photosplat::apply(camera, clean_render)
                                      : clean_render;
    ViewEval ve;
    ve.view_index = idx;
    const auto pred_img = tensor_to_image(*pred);
    ve.psnr_distorted = psnr(pred_img, dataset.images[idx]);
    ve.ssim_distorted = ssim(pred_img, dataset.images[idx]);
    if (dataset.has_gt) {
      ve.has_clean = true;
      const auto clean_img = tensor_to_image(*clean_render);
      ve.psnr_clean = psnr(clean_img, dataset.gt.clean[idx]);
      ve.ssim_clean = ssim(clean_img, dataset.gt.clean[idx]);
    }
    report.views.push_back(ve);
  }
  report.finalize_means();

  if (dataset.has_gt && config.camera_enabled) {
    const auto maps = eval_maps(camera, dataset.width, dataset.height);
    const double r_cam = camera.settings.r_coc_px;
    // Multiplicative part of each model: A * DiskMean[beta] against
    // V * DiskMean[S_alpha], leaving emission out of the comparison.
    auto beta_blurred = disk_conv2d(maps.beta, r_cam);
    auto recovered = flatten_channels(*mul(maps.attenuation, beta_blurred));
    auto gt_alpha_blurred =
        disk_conv2d(image_to_tensor(dataset.gt.s_alpha), dataset.gt.spec.r_coc_px);
    auto gt_map =
        flatten_channels(*mul(image_to_tensor(dataset.gt.vignette),
                              gt_alpha_blurred));
    report.has_maps = true;
    report.attenuation_mae = attenuation_error(recovered, gt_map);
    if (!dataset.gt.spec.blobs.empty()) {
      report.has_localization = true;
      report.emission_localization_px = emission_localization(
          tensor_to_image(*maps.gamma), dataset.gt.spec.blobs);
    }
  }
  return report;
}

TrainResult train(const Dataset& dataset, const TrainConfig& config,
                  const std::string& out_dir) {
  auto state = make_trainer(dataset, config);
  const auto test_idx = dataset.test_indices();

  std::string csv =
      "block,stage,camera_loss,scene_loss,psnr_distorted,ssim_distorted,"
      "psnr_clean,ssim_clean\n";
  const std::size_t warmup = static_cast<std::size_t>(
      std::llround(0.2 * static_cast<double>(config.total_blocks)));

  EvalReport last_eval;
  for (std::size_t block = 0; block < warmup + config.total_blocks; ++block) {
    const bool in_warmup = block < warmup;
    double camera_loss = 0.0;
    bool has_camera_loss = false;
    if (!in_warmup && config.camera_enabled &&
        config.camera_steps_per_block > 0) {
      camera_loss = camera_phase(state, dataset, config);
      has_camera_loss = true;
    }
    const double scene_loss = scene_phase(state, dataset, config);

    csv += std::to_string(block);
    csv += in_warmup ? ",warmup," : ",joint,";
    if (has_camera_loss) csv += csv_number(camera_loss);
    csv += ',';
    csv += csv_number(scene_loss);
    if (!test_idx.empty()) {
      last_eval = evaluate(dataset, state.scene, state.camera, config, test_idx);
      csv += ',';
      csv += csv_psnr(last_eval.psnr_distorted_mean);
      csv += ',';
      csv += csv_number(last_eval.ssim_distorted_mean);
      if (last_eval.has_clean) {
        csv += ',';
        csv += csv_psnr(last_eval.psnr_clean_mean);
        csv += ',';
        csv += csv_number(last_eval.ssim_clean_mean);
      } else {
        csv += ",,";
      }
    } else {
      csv += ",,,,";
    }
    csv += '\n';
  }

  if (!test_idx.empty() && warmup + config.total_blocks == 0)
    last_eval = evaluate(dataset, state.scene, state.camera, config, test_idx);

  TrainResult result;
  result.scene = state.scene;
  result.camera = state.camera;
  result.metrics_csv = csv;
  result.final_eval = last_eval;

  if (!out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::uint64_t steps = static_cast<std::uint64_t>(
        (warmup + config.total_blocks) * config.scene_steps_per_block);
    write_checkpoint((fs::path(out_dir) / "scene.ckpt").string(),
                     cloud_to_checkpoint(state.scene, steps));
    auto camera_ckpt = camera_to_checkpoint(state.camera);
    camera_ckpt.iteration = steps;
    write_checkpoint((fs::path(out_dir) / "camera.ckpt").string(),
                     camera_ckpt);
    write_text_file((fs::path(out_dir) / "metrics.csv").string(), csv);
  }
  return result;
}

}  // namespace photosplat
