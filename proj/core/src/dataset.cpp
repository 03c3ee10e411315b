#include "photosplat/dataset.hpp"

#include <cstdio>
#include <filesystem>

#include <json.hpp>

#include "photosplat/common.hpp"

namespace photosplat {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string view_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04zu.png", index);
  return buf;
}

ordered_json image_entry(const fs::path& root, const std::string& rel) {
  ordered_json e;
  e["image"] = rel;
  e["sha256"] = sha256_hex_file((root / rel).string());
  return e;
}

// Existence, checksum, then decode; each failure mode names the file.
Image load_checked(const fs::path& root, const ordered_json& entry) {
  const std::string rel = entry.at("image").get<std::string>();
  const fs::path path = root / rel;
  require(fs::exists(path), "dataset file missing: ", path.string());
  const std::string expected = entry.at("sha256").get<std::string>();
  require(sha256_hex_file(path.string()) == expected,
          "dataset checksum mismatch: ", path.string());
  return read_png16(path.string());
}

[[noreturn]] void malformed(const std::string& detail) {
  fail("dataset manifest malformed: ", detail);
}

}  // namespace

std::vector<std::size_t> Dataset::train_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < views.size(); ++i)
    if (test_stride == 0 || i % test_stride != 0) out.push_back(i);
  return out;
}

std::vector<std::size_t> Dataset::test_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < views.size(); ++i)
    if (test_stride != 0 && i % test_stride == 0) out.push_back(i);
  return out;
}

void write_dataset(const GaussianCloud& cloud,
                   const std::vector<CameraView>& views,
                   const std::vector<Image>& clean,
                   const std::vector<Image>& distorted,
                   const DistortionSpec& spec,
                   const std::array<double, 3>& background,
                   const std::string& out_dir) {
  require(!views.empty(), "write_dataset: no views");
  require(views.size() == clean.size() && views.size() == distorted.size(),
          "write_dataset: view/image count mismatch (", views.size(), " vs ",
          clean.size(), " vs ", distorted.size(), ")");
  const std::size_t w = views[0].width, h = views[0].height;
  for (const auto& view : views) {
    view.validate();
    require(view.width == w && view.height == h,
            "write_dataset: mixed view sizes");
  }
  for (std::size_t i = 0; i < views.size(); ++i)
    require(clean[i].width == w && clean[i].height == h &&
                clean[i].channels == 3 && distorted[i].width == w &&
                distorted[i].height == h && distorted[i].channels == 3,
            "write_dataset: image ", i, " does not match the view size");

  const fs::path root(out_dir);
  fs::create_directories(root / "images");
  fs::create_directories(root / "clean");
  fs::create_directories(root / "gt");

  for (std::size_t i = 0; i < views.size(); ++i) {
    write_png16((root / "images" / view_name(i)).string(), distorted[i]);
    write_png16((root / "clean" / view_name(i)).string(), clean[i]);
  }
  auto maps = gen_ground_truth_maps(spec, w, h);
  write_png16((root / "gt" / "vignette.png").string(), maps.vignette);
  write_png16((root / "gt" / "s_alpha.png").string(), maps.s_alpha);
  write_png16((root / "gt" / "s_beta.png").string(), maps.s_beta);
  write_text_file((root / "spec.toml").string(), distortion_spec_to_toml(spec));
  write_checkpoint((root / "gt" / "cloud.ckpt").string(),
                   cloud_to_checkpoint(cloud, 0));

  ordered_json manifest;
  manifest["width"] = w;
  manifest["height"] = h;
  manifest["fx"] = views[0].fx;
  manifest["fy"] = views[0].fy;
  manifest["cx"] = views[0].cx;
  manifest["cy"] = views[0].cy;
  manifest["test_stride"] = 5;
  manifest["views"] = ordered_json::array();
  for (std::size_t i = 0; i < views.size(); ++i) {
    auto entry = image_entry(root, "images/" + view_name(i));
    entry["world_to_camera"] = views[i].world_to_camera;
    manifest["views"].push_back(std::move(entry));
  }
  ordered_json gt;
  gt["background"] = background;
  gt["spec"] = "spec.toml";
  gt["cloud"] = "gt/cloud.ckpt";
  gt["clean"] = ordered_json::array();
  for (std::size_t i = 0; i < views.size(); ++i)
    gt["clean"].push_back(image_entry(root, "clean/" + view_name(i)));
  gt["vignette"] = image_entry(root, "gt/vignette.png");
  gt["s_alpha"] = image_entry(root, "gt/s_alpha.png");
  gt["s_beta"] = image_entry(root, "gt/s_beta.png");
  manifest["gt"] = std::move(gt);
  write_text_file((root / "manifest.json").string(), manifest.dump(2) + "\n");
}

Dataset load_dataset(const std::string& dir) {
  const fs::path root(dir);
  const fs::path manifest_path = root / "manifest.json";
  require(fs::exists(manifest_path),
          "dataset manifest missing: ", manifest_path.string());

  ordered_json manifest;
  try {
    manifest = ordered_json::parse(read_text_file(manifest_path.string()));
  } catch (const nlohmann::json::exception& e) {
    malformed(e.what());
  }

  Dataset ds;
  try {
    ds.width = manifest.at("width").get<std::size_t>();
    ds.height = manifest.at("height").get<std::size_t>();
    ds.fx = manifest.at("fx").get<double>();
    ds.fy = manifest.at("fy").get<double>();
    ds.cx = manifest.at("cx").get<double>();
    ds.cy = manifest.at("cy").get<double>();
    ds.test_stride = manifest.value("test_stride", std::size_t{5});
    for (const auto& entry : manifest.at("views")) {
      CameraView view;
      view.fx = ds.fx;
      view.fy = ds.fy;
      view.cx = ds.cx;
      view.cy = ds.cy;
      view.width = ds.width;
      view.height = ds.height;
      const auto mat = entry.at("world_to_camera");
      if (!mat.is_array() || mat.size() != 16)
        malformed("world_to_camera must hold 16 numbers");
      for (std::size_t i = 0; i < 16; ++i)
        view.world_to_camera[i] = mat[i].get<double>();
      ds.views.push_back(view);
      ds.images.push_back(load_checked(root, entry));
    }
  } catch (const nlohmann::json::exception& e) {
    malformed(e.what());
  }
  require(!ds.views.empty(), "dataset manifest malformed: no views");
  for (const auto& view : ds.views) view.validate();
  for (std::size_t i = 0; i < ds.images.size(); ++i)
    require(ds.images[i].width == ds.width &&
                ds.images[i].height == ds.height && ds.images[i].channels == 3,
            "dataset image ", i, " does not match the manifest size");

  if (manifest.contains("gt")) {
    const auto& gt = manifest.at("gt");
    try {
      const auto bg = gt.at("background");
      if (!bg.is_array() || bg.size() != 3)
        malformed("gt.background must hold 3 numbers");
      for (std::size_t i = 0; i < 3; ++i)
        ds.gt.background[i] = bg[i].get<double>();
      for (const auto& entry : gt.at("clean"))
        ds.gt.clean.push_back(load_checked(root, entry));
      ds.gt.vignette = load_checked(root, gt.at("vignette"));
      ds.gt.s_alpha = load_checked(root, gt.at("s_alpha"));
      ds.gt.s_beta = load_checked(root, gt.at("s_beta"));
      const fs::path spec_path = root / gt.at("spec").get<std::string>();
      require(fs::exists(spec_path),
              "dataset file missing: ", spec_path.string());
      ds.gt.spec = distortion_spec_from_file(spec_path.string());
    } catch (const nlohmann::json::exception& e) {
      malformed(e.what());
    }
    require(ds.gt.clean.size() == ds.views.size(),
            "dataset manifest malformed: clean image count ",
            ds.gt.clean.size(), " does not match view count ",
            ds.views.size());
    ds.has_gt = true;
  }
  return ds;
}

Checkpoint cloud_to_checkpoint(const GaussianCloud& cloud,
                               std::uint64_t iteration) {
  Checkpoint ckpt;
  ckpt.iteration = iteration;
  ckpt.add("centers", cloud.centers->values());
  ckpt.add("log_scales", cloud.log_scales->values());
  ckpt.add("rotations", cloud.rotations->values());
  ckpt.add("opacity_logits", cloud.opacity_logits->values());
  ckpt.add("color_logits", cloud.color_logits->values());
  return ckpt;
}

GaussianCloud cloud_from_checkpoint(const Checkpoint& ckpt) {
  const auto& centers = ckpt.block("centers");
  require(centers.size() % 3 == 0, "cloud checkpoint: centers size ",
          centers.size(), " is not a multiple of 3");
  const std::size_t n = centers.size() / 3;
  auto cloud = GaussianCloud::create(n);
  auto load = [&](const char* name, const TensorPtr& dst) {
    const auto& block = ckpt.block(name);
    require(block.size() == dst->size(), "cloud checkpoint: block ", name,
            " has ", block.size(), " values, expected ", dst->size());
    dst->values() = block;
  };
  load("centers", cloud.centers);
  load("log_scales", cloud.log_scales);
  load("rotations", cloud.rotations);
  load("opacity_logits", cloud.opacity_logits);
  load("color_logits", cloud.color_logits);
  return cloud;
}

}  // namespace photosplat
