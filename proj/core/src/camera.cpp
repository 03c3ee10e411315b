#include "photosplat/camera.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <tuple>

#include "json.hpp"
#include "photosplat/common.hpp"
#include "photosplat/ops.hpp"
#include "photosplat/random.hpp"

namespace photosplat {

namespace {

constexpr double kPi = 3.14159265358979323846;

// The encoding depends only on the pixel grid, so one tensor per
// (width, height, L) serves every evaluation.
TensorPtr encoding_for(std::size_t width, std::size_t height,
                       std::size_t freqs) {
  static std::map<std::tuple<std::size_t, std::size_t, std::size_t>,
                  TensorPtr>
      cache;
  const auto key = std::make_tuple(width, height, freqs);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const std::size_t per_dim = 1 + 2 * freqs;
  auto enc = Tensor::create({width * height, 2 * per_dim});
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      const double u =
          width > 1 ? 2.0 * static_cast<double>(x) / (width - 1.0) - 1.0
                    : 0.0;
      const double v =
          height > 1 ? 2.0 * static_cast<double>(y) / (height - 1.0) - 1.0
                     : 0.0;
      double* row = enc->data() + (y * width + x) * 2 * per_dim;
      const double coords[2] = {u, v};
      for (int d = 0; d < 2; ++d) {
        double* f = row + d * per_dim;
        f[0] = coords[d];
        for (std::size_t k = 0; k < freqs; ++k) {
          const double arg = std::ldexp(kPi, static_cast<int>(k)) * coords[d];
          f[1 + 2 * k] = std::sin(arg);
          f[2 + 2 * k] = std::cos(arg);
        }
      }
    }
  cache[key] = enc;
  return enc;
}

TensorPtr mlp_forward(const Mlp& mlp, const TensorPtr& x) {
  auto h1 = softplus(add_rowvec(matmul(x, mlp.w1), mlp.b1));
  auto h2 = softplus(add_rowvec(matmul(h1, mlp.w2), mlp.b2));
  return add_rowvec(matmul(h2, mlp.w3), mlp.b3);
}

Mlp make_mlp(std::size_t in_dim, std::size_t hidden, std::size_t out_dim,
             Rng& rng, const std::vector<double>& head_biases) {
  Mlp mlp;
  mlp.w1 = Tensor::create({in_dim, hidden});
  mlp.b1 = Tensor::create({hidden});
  mlp.w2 = Tensor::create({hidden, hidden});
  mlp.b2 = Tensor::create({hidden});
  mlp.w3 = Tensor::create({hidden, out_dim});
  mlp.b3 = Tensor::create({out_dim});
  const double s1 = std::sqrt(6.0 / static_cast<double>(in_dim + hidden));
  for (std::size_t i = 0; i < mlp.w1->size(); ++i)
    mlp.w1->set(i, rng.uniform(-s1, s1));
  const double s2 = std::sqrt(6.0 / static_cast<double>(2 * hidden));
  for (std::size_t i = 0; i < mlp.w2->size(); ++i)
    mlp.w2->set(i, rng.uniform(-s2, s2));
  for (std::size_t i = 0; i < out_dim; ++i) mlp.b3->set(i, head_biases[i]);
  return mlp;
}

Image tensor_to_image(const Tensor& t, double v_max) {
  const std::size_t h = t.dim(0), w = t.dim(1);
  const std::size_t c = t.rank() == 3 ? t.dim(2) : 1;
  Image img(w, h, c);
  for (std::size_t i = 0; i < t.size(); ++i)
    img.pixels[i] = t.at(i) / v_max;
  return img;
}

}  // namespace

void CameraSettings::validate() const {
  require(encoding_freqs >= 1 && encoding_freqs <= 16,
          "camera settings: encoding_freqs out of range");
  require(hidden_width >= 1, "camera settings: empty hidden layer");
  require(attenuation_channels == 1 || attenuation_channels == 3,
          "camera settings: attenuation_channels must be 1 or 3");
  require(r_coc_px >= 0.0 && std::isfinite(r_coc_px),
          "camera settings: bad defocus radius");
}

std::vector<TensorPtr> PhotometricCamera::params() const {
  auto p = internal.params();
  auto e = external.params();
  p.insert(p.end(), e.begin(), e.end());
  return p;
}

void PhotometricCamera::set_requires_grad(bool rg) {
  for (auto& p : params()) p->set_requires_grad(rg);
}

void PhotometricCamera::zero_grad() {
  for (auto& p : params()) p->zero_grad();
}

double coc_radius(const DefocusParams& params) {
  require(params.focal_length > 0 && params.aperture_diameter > 0 &&
              params.object_distance > 0 && params.pixel_pitch > 0,
          "defocus parameters must be positive");
  require(params.focus_distance > params.focal_length,
          "focus distance must exceed the focal length");
  const double meters = 0.5 * params.focal_length * params.aperture_diameter *
                        std::abs(params.object_distance -
                                 params.focus_distance) /
                        (params.object_distance *
                         (params.focus_distance - params.focal_length));
  return meters / params.pixel_pitch;
}

PhotometricCamera init_identity(const CameraSettings& settings,
                                std::uint64_t seed) {
  settings.validate();
  PhotometricCamera camera;
  camera.settings = settings;
  Rng rng(seed);
  const std::size_t ac = settings.attenuation_channels;
  const std::vector<double> internal_biases(ac, 5.3);
  std::vector<double> external_biases(ac, 5.3);
  external_biases.insert(external_biases.end(), 3, -7.0);
  Rng rng_int = rng.fork(1);
  Rng rng_ext = rng.fork(2);
  camera.internal = make_mlp(settings.encoded_dim(), settings.hidden_width,
                             ac, rng_int, internal_biases);
  camera.external = make_mlp(settings.encoded_dim(), settings.hidden_width,
                             ac + 3, rng_ext, external_biases);
  return camera;
}

CameraMaps eval_maps(const PhotometricCamera& camera, std::size_t width,
                     std::size_t height) {
  camera.settings.validate();
  require(width > 0 && height > 0, "eval_maps: empty image plane");
  const std::size_t ac = camera.settings.attenuation_channels;
  auto x = encoding_for(width, height, camera.settings.encoding_freqs);

  CameraMaps maps;
  auto a = sigmoid(mlp_forward(camera.internal, x));
  maps.attenuation = ac == 1 ? reshape(a, {height, width})
                             : reshape(a, {height, width, 3});
  auto ext = mlp_forward(camera.external, x);
  auto beta = sigmoid(slice_cols(ext, 0, ac));
  maps.beta = ac == 1 ? reshape(beta, {height, width})
                      : reshape(beta, {height, width, 3});
  maps.gamma = reshape(softplus(slice_cols(ext, ac, ac + 3)),
                       {height, width, 3});
  return maps;
}

TensorPtr apply_with_maps(const CameraMaps& maps, double r_coc_px,
                          const TensorPtr& radiance) {
  require(radiance->rank() == 3 && radiance->dim(2) == 3,
          "apply: radiance must be [H,W,3], got ", radiance->shape_str());
  auto expand = [&](const TensorPtr& m) {
    return m->rank() == 2 ? expand_channels(m, 3) : m;
  };
  auto beta3 = expand(maps.beta);
  require(Tensor::same_shape(*beta3, *radiance),
          "apply: camera maps sized for a different image");
  auto emitted = add(mul(beta3, radiance), maps.gamma);
  auto blurred = disk_conv2d(emitted, r_coc_px);
  return mul(expand(maps.attenuation), blurred);
}

TensorPtr apply(const PhotometricCamera& camera, const TensorPtr& radiance) {
  require(radiance->rank() == 3, "apply: radiance must be [H,W,3]");
  auto maps = eval_maps(camera, radiance->dim(1), radiance->dim(0));
  return apply_with_maps(maps, camera.settings.r_coc_px, radiance);
}

Checkpoint camera_to_checkpoint(const PhotometricCamera& camera) {
  Checkpoint ckpt;
  ckpt.add_scalar("settings.encoding_freqs",
                  static_cast<double>(camera.settings.encoding_freqs));
  ckpt.add_scalar("settings.hidden_width",
                  static_cast<double>(camera.settings.hidden_width));
  ckpt.add_scalar("settings.attenuation_channels",
                  static_cast<double>(camera.settings.attenuation_channels));
  ckpt.add_scalar("settings.r_coc_px", camera.settings.r_coc_px);
  const char* names[6] = {"w1", "b1", "w2", "b2", "w3", "b3"};
  const auto dump = [&](const std::string& prefix, const Mlp& mlp) {
    auto params = mlp.params();
    for (std::size_t i = 0; i < params.size(); ++i)
      ckpt.add(prefix + names[i], params[i]->values());
  };
  dump("internal.", camera.internal);
  dump("external.", camera.external);
  return ckpt;
}

PhotometricCamera camera_from_checkpoint(const Checkpoint& ckpt) {
  CameraSettings settings;
  settings.encoding_freqs =
      static_cast<std::size_t>(ckpt.scalar("settings.encoding_freqs"));
  settings.hidden_width =
      static_cast<std::size_t>(ckpt.scalar("settings.hidden_width"));
  settings.attenuation_channels =
      static_cast<std::size_t>(ckpt.scalar("settings.attenuation_channels"));
  settings.r_coc_px = ckpt.scalar("settings.r_coc_px");
  PhotometricCamera camera = init_identity(settings, 0);
  const char* names[6] = {"w1", "b1", "w2", "b2", "w3", "b3"};
  const auto load = [&](const std::string& prefix, Mlp& mlp) {
    auto params = mlp.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& stored = ckpt.block(prefix + names[i]);
      require(stored.size() == params[i]->size(),
              "camera checkpoint block ", prefix + names[i],
              " has the wrong size");
      params[i]->values() = stored;
    }
  };
  load("internal.", camera.internal);
  load("external.", camera.external);
  return camera;
}

DistortionMaps render_distortion_maps(const PhotometricCamera& camera,
                                      std::size_t width, std::size_t height) {
  auto maps = eval_maps(camera, width, height);
  auto ones = Tensor::create({height, width, 3});
  ones->fill(1.0);
  auto effective =
      apply_with_maps(maps, camera.settings.r_coc_px, ones);
  auto beta_blurred = disk_conv2d(maps.beta, camera.settings.r_coc_px);

  DistortionMaps out;
  double gamma_max = 0.0;
  for (std::size_t i = 0; i < maps.gamma->size(); ++i)
    gamma_max = std::max(gamma_max, maps.gamma->at(i));
  double effective_max = 0.0;
  for (std::size_t i = 0; i < effective->size(); ++i)
    effective_max = std::max(effective_max, effective->at(i));
  out.gamma_v_max = std::max(gamma_max, 1e-6);
  out.effective_v_max = std::max(effective_max, 1.0);
  out.attenuation = tensor_to_image(*maps.attenuation, 1.0);
  out.beta_blurred = tensor_to_image(*beta_blurred, 1.0);
  out.gamma = tensor_to_image(*maps.gamma, out.gamma_v_max);
  out.effective = tensor_to_image(*effective, out.effective_v_max);
  return out;
}

void write_distortion_maps(const DistortionMaps& maps,
                           const std::string& out_dir, double r_coc_px) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto path = [&](const char* name) {
    return (fs::path(out_dir) / name).string();
  };
  write_png16(path("attenuation.png"), maps.attenuation);
  write_png16(path("beta.png"), maps.beta_blurred);
  write_png16(path("gamma.png"), maps.gamma);
  write_png16(path("effective.png"), maps.effective);

  nlohmann::ordered_json sidecar;
  sidecar["r_coc_px"] = r_coc_px;
  sidecar["v_max"] = {{"attenuation", 1.0},
                      {"beta", 1.0},
                      {"gamma", maps.gamma_v_max},
                      {"effective", maps.effective_v_max}};
  write_text_file(path("maps.json"), sidecar.dump(2) + "\n");
}

}  // namespace photosplat
