#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include "photosplat/dataset.hpp"
#include "photosplat/io.hpp"
#include "photosplat/synth.hpp"
#include "photosplat/train.hpp"

namespace fs = std::filesystem;
using namespace photosplat;

namespace {

std::pair<std::size_t, std::size_t> parse_size(const std::string& text) {
  const auto x = text.find('x');
  require(x != std::string::npos && x > 0 && x + 1 < text.size(),
          "bad --size, expected WxH: ", text);
  std::size_t wend = 0, hend = 0;
  const auto w = std::stoul(text.substr(0, x), &wend);
  const auto h = std::stoul(text.substr(x + 1), &hend);
  require(wend == x && hend == text.size() - x - 1 && w > 0 && h > 0,
          "bad --size, expected WxH: ", text);
  return {w, h};
}

struct LoadedRun {
  TrainConfig config;
  GaussianCloud scene;
  PhotometricCamera camera;
};

LoadedRun load_run(const std::string& run_dir) {
  const fs::path dir(run_dir);
  require(fs::is_directory(dir), "run directory not found: ", run_dir);
  LoadedRun run{train_config_from_file((dir / "config.toml").string()),
                cloud_from_checkpoint(read_checkpoint((dir / "scene.ckpt").string())),
                camera_from_checkpoint(read_checkpoint((dir / "camera.ckpt").string()))};
  return run;
}

std::string psnr_text(const Psnr& p) {
  return p.infinite ? "inf" : std::to_string(p.db);
}

std::string eval_summary(const EvalReport& report) {
  std::string line = "psnr_distorted=" + psnr_text(report.psnr_distorted_mean) +
                     " ssim_distorted=" + std::to_string(report.ssim_distorted_mean);
  if (report.has_clean) {
    line += " psnr_clean=" + psnr_text(report.psnr_clean_mean) +
            " ssim_clean=" + std::to_string(report.ssim_clean_mean);
  }
  if (report.has_maps)
    line += " attenuation_mae=" + std::to_string(report.attenuation_mae);
  if (report.has_localization)
    line += " emission_localization_px=" +
            std::to_string(report.emission_localization_px);
  return line;
}

int run_synth(const std::string& out_dir, const std::string& preset,
              std::size_t views, const std::string& size,
              const std::string& spec_path, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.preset = preset;
  cfg.orbit.view_count = views;
  std::tie(cfg.orbit.width, cfg.orbit.height) = parse_size(size);
  if (!spec_path.empty()) cfg.spec = distortion_spec_from_file(spec_path);
  cfg.seed = seed;
  generate_dataset(cfg, out_dir);
  std::cout << "wrote " << views << " views (" << cfg.orbit.width << "x"
            << cfg.orbit.height << ") to " << out_dir << "\n";
  return 0;
}

int run_train(const std::string& data_dir, const std::string& config_path,
              const std::string& out_dir, bool seed_given, std::uint64_t seed) {
  auto dataset = load_dataset(data_dir);
  TrainConfig cfg =
      config_path.empty() ? TrainConfig{} : train_config_from_file(config_path);
  if (seed_given) cfg.seed = seed;
  cfg.validate();

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  if (config_path.empty()) {
    write_text_file((dir / "config.toml").string(), train_config_to_toml(cfg));
  } else {
    fs::copy_file(config_path, dir / "config.toml",
                  fs::copy_options::overwrite_existing);
  }

  auto result = train(dataset, cfg, out_dir);
  write_text_file((dir / "eval.json").string(), result.final_eval.to_json());

  std::string log = "data: " + data_dir + "\n";
  log += "views: " + std::to_string(dataset.views.size()) + " (train " +
         std::to_string(dataset.train_indices().size()) + ", test " +
         std::to_string(dataset.test_indices().size()) + ")\n";
  log += "seed: " + std::to_string(cfg.seed) + "\n";
  log += "blocks: " + std::to_string(cfg.total_blocks) + "\n";
  log += "final: " + eval_summary(result.final_eval) + "\n";
  write_text_file((dir / "train.log").string(), log);

  std::cout << "trained " << cfg.total_blocks << " blocks; "
            << eval_summary(result.final_eval) << "\n";
  return 0;
}

int run_eval(const std::string& run_dir, const std::string& data_dir) {
  auto run = load_run(run_dir);
  auto dataset = load_dataset(data_dir);
  auto report =
      evaluate(dataset, run.scene, run.camera, run.config, dataset.test_indices());
  write_text_file((fs::path(run_dir) / "eval.json").string(), report.to_json());
  std::cout << eval_summary(report) << "\n";
  return 0;
}

int run_render(const std::string& run_dir, const std::string& data_dir,
               std::size_t view_index, bool with_camera,
               const std::string& out_path) {
  auto run = load_run(run_dir);
  auto dataset = load_dataset(data_dir);
  require(view_index < dataset.views.size(), "view index ", view_index,
          " out of range, dataset has ", dataset.views.size(), " views");
  auto rendered = render(run.scene, dataset.views[view_index],
                         run.config.render_options())
                      .image;
  auto out = with_camera ? photosplat::apply(run.camera, rendered) : rendered;
  if (const auto parent = fs::path(out_path).parent_path(); !parent.empty())
    fs::create_directories(parent);
  write_png16(out_path, tensor_to_image(*out));
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

int run_export_camera(const std::string& run_dir, const std::string& out_dir,
                      const std::string& size) {
  auto run = load_run(run_dir);
  const auto [w, h] = parse_size(size);
  auto maps = render_distortion_maps(run.camera, w, h);
  write_distortion_maps(maps, out_dir, run.camera.settings.r_coc_px);
  std::cout << "wrote camera maps (" << w << "x" << h << ") to " << out_dir
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joint radiance field and photometric camera reconstruction"};
  app.require_subcommand(1);

  std::string out_dir, data_dir, run_dir, config_path, spec_path, out_path;
  std::string preset = "boxgrid", size = "96x96", export_size = "256x256";
  std::size_t views = 20, view_index = 0;
  std::uint64_t seed = 7;

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  synth->add_option("--out", out_dir, "dataset output directory")->required();
  synth->add_option("--preset", preset, "scene preset (boxgrid, shell)");
  synth->add_option("--views", views, "number of orbit views");
  synth->add_option("--size", size, "image size as WxH");
  synth->add_option("--spec", spec_path, "distortion spec TOML (default identity)");
  synth->add_option("--seed", seed, "random seed");

  std::uint64_t train_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "fit scene and camera to a dataset");
  train_cmd->add_option("--data", data_dir, "dataset directory")->required();
  train_cmd->add_option("--out", out_dir, "run output directory")->required();
  train_cmd->add_option("--config", config_path, "training config TOML");
  auto* train_seed_opt =
      train_cmd->add_option("--seed", train_seed, "override the config seed");

  auto* eval_cmd = app.add_subcommand("eval", "score a run on the held-out views");
  eval_cmd->add_option("--run", run_dir, "run directory")->required();
  eval_cmd->add_option("--data", data_dir, "dataset directory")->required();

  auto* render_cmd = app.add_subcommand("render", "render one view from a run");
  render_cmd->add_option("--run", run_dir, "run directory")->required();
  render_cmd->add_option("--data", data_dir, "dataset directory")->required();
  render_cmd->add_option("--out", out_path, "output PNG path")->required();
  render_cmd->add_option("--view-index", view_index, "view to render");
  auto* scene_only =
      render_cmd->add_flag("--scene-only", "render without the camera model");
  auto* with_camera =
      render_cmd->add_flag("--with-camera", "render through the camera model");
  scene_only->excludes(with_camera);
  with_camera->excludes(scene_only);

  auto* export_cmd =
      app.add_subcommand("export-camera", "write the learned camera maps");
  export_cmd->add_option("--run", run_dir, "run directory")->required();
  export_cmd->add_option("--out", out_dir, "maps output directory")->required();
  export_cmd->add_option("--size", export_size, "map size as WxH");

  try {
    app.parse(argc, argv);
    if (synth->parsed())
      return run_synth(out_dir, preset, views, size, spec_path, seed);
    if (train_cmd->parsed())
      return run_train(data_dir, config_path, out_dir,
                       train_seed_opt->count() > 0, train_seed);
    if (eval_cmd->parsed()) return run_eval(run_dir, data_dir);
    if (render_cmd->parsed())
      return run_render(run_dir, data_dir, view_index,
                        with_camera->count() > 0, out_path);
    if (export_cmd->parsed())
      return run_export_camera(run_dir, out_dir, export_size);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
