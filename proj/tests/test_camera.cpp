#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "photosplat/camera.hpp"
#include "photosplat/ops.hpp"
#include "photosplat/random.hpp"
#include "support/gradcheck.hpp"

using namespace photosplat;
using photosplat::testing::gradcheck;

namespace {

TensorPtr random_image(std::size_t h, std::size_t w, Rng& rng) {
  auto t = Tensor::create({h, w, 3});
  for (std::size_t i = 0; i < t->size(); ++i) t->set(i, rng.uniform());
  return t;
}

// Identity init with small random head weights so gradients reach every
// layer during checks.
PhotometricCamera jittered_camera(const CameraSettings& settings,
                                  std::uint64_t seed) {
  auto cam = init_identity(settings, seed);
  Rng rng(seed + 1000);
  for (auto* mlp : {&cam.internal, &cam.external}) {
    for (std::size_t i = 0; i < mlp->w3->size(); ++i)
      mlp->w3->set(i, rng.uniform(-0.3, 0.3));
    for (std::size_t i = 0; i < mlp->b1->size(); ++i)
      mlp->b1->set(i, rng.uniform(-0.05, 0.05));
  }
  return cam;
}

CameraMaps constant_maps(std::size_t h, std::size_t w, double a, double b,
                         double g) {
  CameraMaps maps;
  auto at = Tensor::create({h, w});
  at->fill(a);
  auto bt = Tensor::create({h, w});
  bt->fill(b);
  auto gt = Tensor::create({h, w, 3});
  gt->fill(g);
  maps.attenuation = at;
  maps.beta = bt;
  maps.gamma = gt;
  return maps;
}

}  // namespace

TEST_CASE("defocus radius formula") {
  DefocusParams p;
  p.pixel_pitch = 1.0;
  p.focal_length = 0.05;
  p.aperture_diameter = 0.025;
  p.focus_distance = 2.0;
  p.object_distance = 2.0;
  CHECK(coc_radius(p) == 0.0);
  p.object_distance = 0.05;
  CHECK(coc_radius(p) == doctest::Approx(0.0125).epsilon(1e-12));
  p.aperture_diameter = 0.02;
  p.focus_distance = 1.0;
  p.object_distance = 0.5;
  CHECK(coc_radius(p) == doctest::Approx(5.263157894736842e-4).epsilon(1e-9));
  p.pixel_pitch = 1e-5;
  CHECK(coc_radius(p) == doctest::Approx(52.63157894736842).epsilon(1e-9));
  p.focus_distance = 0.04;
  CHECK_THROWS_AS(coc_radius(p), Error);
}

TEST_CASE("identity initialization opens near one and emits near zero") {
  CameraSettings settings;
  auto cam = init_identity(settings, 9);
  auto maps = eval_maps(cam, 32, 24);
  CHECK(maps.attenuation->dim(0) == 24);
  CHECK(maps.attenuation->dim(1) == 32);
  for (std::size_t i = 0; i < maps.attenuation->size(); ++i) {
    CHECK(maps.attenuation->at(i) >= 0.99);
    CHECK(maps.attenuation->at(i) <= 1.0);
  }
  for (std::size_t i = 0; i < maps.beta->size(); ++i) {
    CHECK(maps.beta->at(i) >= 0.99);
    CHECK(maps.beta->at(i) <= 1.0);
  }
  for (std::size_t i = 0; i < maps.gamma->size(); ++i) {
    CHECK(maps.gamma->at(i) >= 0.0);
    CHECK(maps.gamma->at(i) <= 1e-3);
  }
}

TEST_CASE("map shape tracks the requested grid for any encoding size") {
  for (std::size_t freqs : {1u, 4u, 6u}) {
    CameraSettings settings;
    settings.encoding_freqs = freqs;
    auto cam = init_identity(settings, 2);
    auto maps = eval_maps(cam, 17, 11);
    CHECK(maps.attenuation->shape() == std::vector<std::size_t>{11, 17});
    CHECK(maps.gamma->shape() == std::vector<std::size_t>{11, 17, 3});
  }
}

TEST_CASE("evaluation is pure: identical weights give identical maps") {
  CameraSettings settings;
  auto cam = jittered_camera(settings, 5);
  auto m1 = eval_maps(cam, 16, 16);
  auto m2 = eval_maps(cam, 16, 16);
  CHECK(m1.attenuation->values() == m2.attenuation->values());
  CHECK(m1.beta->values() == m2.beta->values());
  CHECK(m1.gamma->values() == m2.gamma->values());

  auto cam_b = init_identity(settings, 7);
  auto cam_c = init_identity(settings, 7);
  for (std::size_t i = 0; i < cam_b.params().size(); ++i)
    CHECK(cam_b.params()[i]->values() == cam_c.params()[i]->values());
}

TEST_CASE("identity camera is a near-identity on unit-range images") {
  CameraSettings settings;
  auto cam = init_identity(settings, 3);
  Rng rng(12);
  auto radiance = random_image(24, 24, rng);
  auto out = photosplat::apply(cam, radiance);
  double max_dev = 0.0;
  for (std::size_t i = 0; i < out->size(); ++i)
    max_dev = std::max(max_dev, std::abs(out->at(i) - radiance->at(i)));
  CHECK(max_dev <= 0.01);
}

TEST_CASE("apply with hand-built maps follows the model equation") {
  SUBCASE("pure attenuation halves a constant image") {
    auto maps = constant_maps(8, 8, 0.5, 1.0, 0.0);
    auto r = Tensor::create({8, 8, 3});
    r->fill(0.8);
    auto out = apply_with_maps(maps, 0.0, r);
    for (std::size_t i = 0; i < out->size(); ++i)
      CHECK(out->at(i) == doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("emission-only path is radiance-independent for any radius") {
    auto maps = constant_maps(8, 8, 1.0, 0.0, 0.2);
    Rng rng(4);
    auto r = random_image(8, 8, rng);
    for (double radius : {0.0, 2.5}) {
      auto out = apply_with_maps(maps, radius, r);
      for (std::size_t i = 0; i < out->size(); ++i)
        CHECK(out->at(i) == doctest::Approx(0.2).epsilon(1e-12));
    }
  }
}

TEST_CASE("zero-radius defocus equals the unblurred closed form exactly") {
  CameraSettings settings;
  auto cam = jittered_camera(settings, 21);
  Rng rng(22);
  auto r = random_image(12, 12, rng);
  auto maps = eval_maps(cam, 12, 12);
  auto via_apply = apply_with_maps(maps, 0.0, r);
  auto direct = mul(expand_channels(maps.attenuation, 3),
                    add(mul(expand_channels(maps.beta, 3), r), maps.gamma));
  CHECK(via_apply->values() == direct->values());
}

TEST_CASE("apply is monotone in the radiance when gamma is fixed") {
  CameraSettings settings;
  settings.r_coc_px = 2.0;
  auto cam = jittered_camera(settings, 8);
  Rng rng(9);
  auto r1 = random_image(16, 16, rng);
  auto r2 = Tensor::create({16, 16, 3});
  for (std::size_t i = 0; i < r2->size(); ++i)
    r2->set(i, r1->at(i) + rng.uniform(0.0, 0.2));
  auto i1 = photosplat::apply(cam, r1);
  auto i2 = photosplat::apply(cam, r2);
  for (std::size_t i = 0; i < i1->size(); ++i)
    CHECK(i1->at(i) <= i2->at(i) + 1e-12);
}

TEST_CASE("range constraints hold for arbitrary weights") {
  CameraSettings settings;
  auto cam = init_identity(settings, 1);
  Rng rng(2);
  for (auto& p : cam.params())
    for (std::size_t i = 0; i < p->size(); ++i)
      p->set(i, rng.uniform(-2.0, 2.0));
  auto maps = eval_maps(cam, 20, 20);
  for (std::size_t i = 0; i < maps.attenuation->size(); ++i) {
    CHECK(maps.attenuation->at(i) >= 0.0);
    CHECK(maps.attenuation->at(i) <= 1.0);
  }
  for (std::size_t i = 0; i < maps.beta->size(); ++i) {
    CHECK(maps.beta->at(i) >= 0.0);
    CHECK(maps.beta->at(i) <= 1.0);
  }
  for (std::size_t i = 0; i < maps.gamma->size(); ++i)
    CHECK(maps.gamma->at(i) >= 0.0);
}

TEST_CASE("gradients through apply match finite differences") {
  CameraSettings settings;
  settings.encoding_freqs = 2;
  settings.hidden_width = 6;
  settings.r_coc_px = 1.0;
  auto cam = jittered_camera(settings, 31);
  Rng rng(32);
  auto radiance = random_image(6, 6, rng);
  auto res = gradcheck([&] { return mean(photosplat::apply(cam, radiance)); },
                       cam.params(), 1e-4);
  CHECK(res.max_rel_error <= 1e-5);
}

TEST_CASE("gradients flow into the radiance as well") {
  CameraSettings settings;
  settings.encoding_freqs = 2;
  settings.hidden_width = 6;
  settings.r_coc_px = 1.5;
  auto cam = jittered_camera(settings, 41);
  Rng rng(42);
  auto radiance = random_image(6, 6, rng);
  auto res =
      gradcheck([&] { return mean(photosplat::apply(cam, radiance)); }, {radiance});
  CHECK(res.max_rel_error <= 1e-6);
}

TEST_CASE("adjacent-pixel smoothness of the attenuation map") {
  CameraSettings settings;
  for (std::uint64_t seed : {1ull, 2ull}) {
    auto cam = jittered_camera(settings, seed);
    auto maps = eval_maps(cam, 48, 48);
    double max_diff = 0.0;
    for (std::size_t y = 0; y < 48; ++y)
      for (std::size_t x = 0; x + 1 < 48; ++x) {
        max_diff = std::max(
            max_diff, std::abs(maps.attenuation->at(y * 48 + x) -
                               maps.attenuation->at(y * 48 + x + 1)));
        max_diff = std::max(
            max_diff, std::abs(maps.attenuation->at(x * 48 + y) -
                               maps.attenuation->at((x + 1) * 48 + y)));
      }
    CHECK(max_diff < 0.1);
  }
}

TEST_CASE("camera checkpoints round-trip bit-exactly") {
  CameraSettings settings;
  settings.r_coc_px = 3.25;
  auto cam = jittered_camera(settings, 77);
  const auto path =
      (std::filesystem::temp_directory_path() / "camera_rt.ckpt").string();
  write_checkpoint(path, camera_to_checkpoint(cam));
  auto restored = camera_from_checkpoint(read_checkpoint(path));
  CHECK(restored.settings.r_coc_px == 3.25);
  CHECK(restored.settings.encoding_freqs == settings.encoding_freqs);
  auto a = cam.params();
  auto b = restored.params();
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(a[i]->values() == b[i]->values());
  std::filesystem::remove(path);
}

TEST_CASE("exported maps describe the camera") {
  CameraSettings settings;
  auto cam = init_identity(settings, 55);
  auto maps = render_distortion_maps(cam, 24, 24);
  for (double v : maps.effective.pixels)
    CHECK(std::abs(v * maps.effective_v_max - 1.0) <= 0.01);

  const auto dir =
      (std::filesystem::temp_directory_path() / "camera_maps_test").string();
  write_distortion_maps(maps, dir, settings.r_coc_px);
  auto eff = read_png16(dir + "/effective.png");
  CHECK(eff.width == 24);
  CHECK(eff.channels == 3);
  auto att = read_png16(dir + "/attenuation.png");
  CHECK(att.channels == 1);
  CHECK(read_text_file(dir + "/maps.json").find("v_max") !=
        std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("effective map equals the attenuation map for a pure vignette") {
  const std::size_t n = 16;
  CameraMaps maps = constant_maps(n, n, 1.0, 1.0, 0.0);
  for (std::size_t y = 0; y < n; ++y)
    for (std::size_t x = 0; x < n; ++x) {
      const double u = 2.0 * x / (n - 1.0) - 1.0;
      const double v = 2.0 * y / (n - 1.0) - 1.0;
      const double r2 = (u * u + v * v) / 2.0;
      maps.attenuation->set(y * n + x, 1.0 - 0.45 * r2);
    }
  auto ones = Tensor::create({n, n, 3});
  ones->fill(1.0);
  auto effective = apply_with_maps(maps, 0.0, ones);
  for (std::size_t p = 0; p < n * n; ++p)
    for (int ch = 0; ch < 3; ++ch)
      CHECK(effective->at(p * 3 + ch) ==
            doctest::Approx(maps.attenuation->at(p)).epsilon(1e-12));
  // Corners darker than the center.
  CHECK(effective->at(0) < effective->at((n / 2 * n + n / 2) * 3));
}
