#include "photosplat/synth.hpp"

#include <cmath>
#include <cstdio>
#include <string>

#include "photosplat/common.hpp"
#include "photosplat/dataset.hpp"
#include "photosplat/ops.hpp"
#include "photosplat/random.hpp"

namespace photosplat {

namespace {

double norm_coord(std::size_t i, std::size_t extent) {
  if (extent <= 1) return 0.0;
  return 2.0 * static_cast<double>(i) / static_cast<double>(extent - 1) - 1.0;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void DistortionSpec::validate() const {
  require(r_coc_px >= 0.0, "distortion spec: r_coc_px must be >= 0, got ",
          r_coc_px);
  if (vignette_kind == VignetteKind::kPolynomial)
    require(1.0 - a2 - a4 > 0.0, "distortion spec: vignette reaches ",
            1.0 - a2 - a4, " at the corner");
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const auto& b = blobs[i];
    require(b.radius > 0.0, "distortion spec: blob ", i,
            " radius must be positive");
    require(b.attenuation_depth >= 0.0 && b.attenuation_depth <= 1.0,
            "distortion spec: blob ", i, " attenuation_depth outside [0,1]");
    for (double e : b.emission_color)
      require(e >= 0.0, "distortion spec: blob ", i,
              " emission must be non-negative");
  }
}

DistortionSpec distortion_spec_from_toml(const TomlDocument& doc) {
  DistortionSpec spec;
  const std::string kind = doc.string_or("vignette.kind", "none");
  if (kind == "polynomial")
    spec.vignette_kind = VignetteKind::kPolynomial;
  else
    require(kind == "none", "distortion spec: unknown vignette kind \"", kind,
            "\"");
  spec.a2 = doc.number_or("vignette.a2", 0.0);
  spec.a4 = doc.number_or("vignette.a4", 0.0);
  spec.r_coc_px = doc.number_or("r_coc_px", 0.0);
  spec.seed = static_cast<std::uint64_t>(doc.integer_or("seed", 0));
  for (const auto& entry : doc.table_array("blob")) {
    ContaminantBlob blob;
    auto center = toml_entry_list(entry, "center");
    require(center.size() == 2, "distortion spec: blob center needs 2 values");
    blob.center = {center[0], center[1]};
    blob.radius = toml_entry_number(entry, "radius");
    blob.attenuation_depth = toml_entry_number(entry, "attenuation_depth");
    auto emission = toml_entry_list(entry, "emission_color");
    require(emission.size() == 3,
            "distortion spec: blob emission_color needs 3 values");
    blob.emission_color = {emission[0], emission[1], emission[2]};
    spec.blobs.push_back(blob);
  }
  spec.validate();
  return spec;
}

DistortionSpec distortion_spec_from_file(const std::string& path) {
  return distortion_spec_from_toml(toml_parse_file(path));
}

std::string distortion_spec_to_toml(const DistortionSpec& spec) {
  std::string out;
  out += "r_coc_px = " + format_number(spec.r_coc_px) + "\n";
  out += "seed = " + std::to_string(spec.seed) + "\n\n";
  out += "[vignette]\n";
  out += std::string("kind = \"") +
         (spec.vignette_kind == VignetteKind::kPolynomial ? "polynomial"
                                                          : "none") +
         "\"\n";
  out += "a2 = " + format_number(spec.a2) + "\n";
  out += "a4 = " + format_number(spec.a4) + "\n";
  for (const auto& b : spec.blobs) {
    out += "\n[[blob]]\n";
    out += "center = [" + format_number(b.center[0]) + ", " +
           format_number(b.center[1]) + "]\n";
    out += "radius = " + format_number(b.radius) + "\n";
    out += "attenuation_depth = " + format_number(b.attenuation_depth) + "\n";
    out += "emission_color = [" + format_number(b.emission_color[0]) + ", " +
           format_number(b.emission_color[1]) + ", " +
           format_number(b.emission_color[2]) + "]\n";
  }
  return out;
}

Image gen_vignette(const DistortionSpec& spec, std::size_t width,
                   std::size_t height) {
  Image v(width, height, 1);
  if (spec.vignette_kind == VignetteKind::kNone) {
    for (auto& p : v.pixels) p = 1.0;
    return v;
  }
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const double u = norm_coord(x, width);
      const double w = norm_coord(y, height);
      const double r2 = 0.5 * (u * u + w * w);
      const double value = 1.0 - spec.a2 * r2 - spec.a4 * r2 * r2;
      require(value > 0.0, "gen_vignette: map reaches ", value, " at pixel (",
              x, ", ", y, ")");
      v.at(y, x, 0) = std::min(value, 1.0);
    }
  return v;
}

ContaminationMaps gen_contamination(const DistortionSpec& spec,
                                    std::size_t width, std::size_t height) {
  spec.validate();
  ContaminationMaps maps;
  maps.s_alpha = Image(width, height, 1);
  maps.s_beta = Image(width, height, 3);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const double u = norm_coord(x, width);
      const double v = norm_coord(y, height);
      double alpha = 1.0;
      double beta[3] = {0.0, 0.0, 0.0};
      for (const auto& b : spec.blobs) {
        const double du = u - b.center[0];
        const double dv = v - b.center[1];
        const double g =
            std::exp(-(du * du + dv * dv) / (2.0 * b.radius * b.radius));
        alpha *= 1.0 - b.attenuation_depth * g;
        for (int c = 0; c < 3; ++c) beta[c] += b.emission_color[c] * g;
      }
      maps.s_alpha.at(y, x, 0) = std::clamp(alpha, 0.0, 1.0);
      for (std::size_t c = 0; c < 3; ++c)
        maps.s_beta.at(y, x, c) = std::max(beta[c], 0.0);
    }
  return maps;
}

GroundTruthMaps gen_ground_truth_maps(const DistortionSpec& spec,
                                      std::size_t width, std::size_t height) {
  auto cont = gen_contamination(spec, width, height);
  return {gen_vignette(spec, width, height), std::move(cont.s_alpha),
          std::move(cont.s_beta)};
}

Image apply_distortion(const Image& clean, const GroundTruthMaps& maps,
                       double r_coc_px) {
  require(clean.channels == 3, "apply_distortion: expected RGB input");
  const std::size_t w = clean.width, h = clean.height;
  require(maps.vignette.width == w && maps.vignette.height == h &&
              maps.s_alpha.width == w && maps.s_alpha.height == h &&
              maps.s_beta.width == w && maps.s_beta.height == h,
          "apply_distortion: map size mismatch");

  auto emitted = Tensor::create({h, w, 3});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c)
        emitted->set((y * w + x) * 3 + c,
                     maps.s_alpha.at(y, x, 0) * clean.at(y, x, c) +
                         maps.s_beta.at(y, x, c));
  auto blurred = disk_conv2d(emitted, r_coc_px);

  Image out(w, h, 3);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c)
        out.at(y, x, c) = std::clamp(
            maps.vignette.at(y, x, 0) * blurred->at((y * w + x) * 3 + c), 0.0,
            1.0);
  return out;
}

Image apply_distortion(const Image& clean, const DistortionSpec& spec) {
  return apply_distortion(
      clean, gen_ground_truth_maps(spec, clean.width, clean.height),
      spec.r_coc_px);
}

namespace {

GaussianCloud make_boxgrid(std::uint64_t seed) {
  constexpr std::size_t side = 4;
  const std::size_t n = side * side * side;
  auto cloud = GaussianCloud::create(n);
  Rng rng(seed);
  std::size_t g = 0;
  for (std::size_t i = 0; i < side; ++i)
    for (std::size_t j = 0; j < side; ++j)
      for (std::size_t k = 0; k < side; ++k, ++g) {
        const double base[3] = {
            (static_cast<double>(i) / (side - 1) - 0.5) * 1.1,
            (static_cast<double>(j) / (side - 1) - 0.5) * 1.1,
            (static_cast<double>(k) / (side - 1) - 0.5) * 1.1};
        for (std::size_t a = 0; a < 3; ++a) {
          cloud.centers->set(g * 3 + a, base[a] + rng.uniform(-0.04, 0.04));
          cloud.log_scales->set(g * 3 + a,
                                std::log(rng.uniform(0.05, 0.10)));
        }
        double q[4], qn = 0.0;
        for (auto& qa : q) qa = rng.normal();
        for (double qa : q) qn += qa * qa;
        qn = std::sqrt(qn);
        for (std::size_t a = 0; a < 4; ++a)
          cloud.rotations->set(g * 4 + a, q[a] / qn);
        cloud.opacity_logits->set(g, logit(rng.uniform(0.75, 0.95)));
        const double t[3] = {static_cast<double>(i) / (side - 1),
                             static_cast<double>(j) / (side - 1),
                             static_cast<double>(k) / (side - 1)};
        for (std::size_t a = 0; a < 3; ++a) {
          const double c = std::clamp(
              0.15 + 0.7 * t[a] + rng.uniform(-0.05, 0.05), 0.05, 0.95);
          cloud.color_logits->set(g * 3 + a, logit(c));
        }
      }
  return cloud;
}

GaussianCloud make_shell(std::uint64_t seed) {
  constexpr std::size_t n = 80;
  constexpr double radius = 0.65;
  constexpr double golden = 2.399963229728653;
  auto cloud = GaussianCloud::create(n);
  Rng rng(seed);
  for (std::size_t g = 0; g < n; ++g) {
    const double z = 1.0 - 2.0 * (static_cast<double>(g) + 0.5) / n;
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden * static_cast<double>(g);
    const double dir[3] = {s * std::cos(phi), s * std::sin(phi), z};
    for (std::size_t a = 0; a < 3; ++a) {
      cloud.centers->set(g * 3 + a,
                         radius * dir[a] + rng.uniform(-0.02, 0.02));
      cloud.log_scales->set(g * 3 + a, std::log(rng.uniform(0.07, 0.12)));
      const double c = std::clamp(0.5 + 0.45 * dir[a], 0.05, 0.95);
      cloud.color_logits->set(g * 3 + a, logit(c));
    }
    double q[4], qn = 0.0;
    for (auto& qa : q) qa = rng.normal();
    for (double qa : q) qn += qa * qa;
    qn = std::sqrt(qn);
    for (std::size_t a = 0; a < 4; ++a)
      cloud.rotations->set(g * 4 + a, q[a] / qn);
    cloud.opacity_logits->set(g, logit(rng.uniform(0.75, 0.95)));
  }
  return cloud;
}

}  // namespace

GaussianCloud make_preset_cloud(const std::string& name, std::uint64_t seed) {
  if (name == "boxgrid") return make_boxgrid(seed);
  if (name == "shell") return make_shell(seed);
  fail("unknown scene preset \"", name, "\" (known: boxgrid, shell)");
}

std::vector<CameraView> make_orbit_views(const OrbitParams& params,
                                         std::uint64_t seed) {
  require(params.view_count >= 1, "make_orbit_views: need at least one view");
  require(params.fov_deg > 0.0 && params.fov_deg < 180.0,
          "make_orbit_views: fov must be in (0, 180) degrees");
  constexpr double deg = 3.14159265358979323846 / 180.0;
  const double fx = (static_cast<double>(params.width) / 2.0) /
                    std::tan(0.5 * params.fov_deg * deg);
  Rng rng(seed);
  std::vector<CameraView> views;
  views.reserve(params.view_count);
  for (std::size_t i = 0; i < params.view_count; ++i) {
    const double azimuth = 2.0 * 3.14159265358979323846 *
                               static_cast<double>(i) /
                               static_cast<double>(params.view_count) +
                           rng.uniform(-0.02, 0.02);
    const double elevation =
        rng.uniform(params.elevation_lo_deg, params.elevation_hi_deg) * deg;
    const double r =
        params.radius + rng.uniform(-params.radius_jitter,
                                    params.radius_jitter);
    const std::array<double, 3> eye{r * std::cos(azimuth) * std::cos(elevation),
                                    r * std::sin(azimuth) * std::cos(elevation),
                                    r * std::sin(elevation)};
    std::array<double, 3> target{};
    for (auto& t : target)
      t = rng.uniform(-params.target_jitter, params.target_jitter);
    views.push_back(make_look_at(eye, target, {0.0, 0.0, 1.0}, fx, fx,
                                 params.width, params.height));
  }
  return views;
}

void generate_dataset(const SynthConfig& cfg, const std::string& out_dir) {
  cfg.spec.validate();
  auto cloud = make_preset_cloud(cfg.preset, cfg.seed + 1);
  auto views = make_orbit_views(cfg.orbit, cfg.seed + 2);

  RenderOptions opts;
  opts.background = cfg.background;
  for (std::size_t v = 0; v < views.size(); ++v) {
    const auto& view = views[v];
    const auto& m = view.world_to_camera;
    for (std::size_t g = 0; g < cloud.size(); ++g) {
      const double* p = cloud.centers->data() + g * 3;
      const double z = m[8] * p[0] + m[9] * p[1] + m[10] * p[2] + m[11];
      require(z > opts.z_near, "preset not visible: gaussian ", g,
              " behind view ", v);
      const double px = view.fx *
                            (m[0] * p[0] + m[1] * p[1] + m[2] * p[2] + m[3]) /
                            z +
                        view.cx;
      const double py = view.fy *
                            (m[4] * p[0] + m[5] * p[1] + m[6] * p[2] + m[7]) /
                            z +
                        view.cy;
      require(px >= 1.0 && px <= static_cast<double>(view.width) - 2.0 &&
                  py >= 1.0 && py <= static_cast<double>(view.height) - 2.0,
              "preset not visible: gaussian ", g, " projects to (", px, ", ",
              py, ") in view ", v);
    }
  }

  auto maps =
      gen_ground_truth_maps(cfg.spec, cfg.orbit.width, cfg.orbit.height);
  std::vector<Image> clean, distorted;
  clean.reserve(views.size());
  distorted.reserve(views.size());
  for (const auto& view : views) {
    auto result = render(cloud, view, opts);
    clean.push_back(tensor_to_image(*result.image));
    distorted.push_back(apply_distortion(clean.back(), maps, cfg.spec.r_coc_px));
  }
  write_dataset(cloud, views, clean, distorted, cfg.spec, cfg.background,
                out_dir);
}

}  // namespace photosplat
