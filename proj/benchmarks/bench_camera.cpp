#include <benchmark/benchmark.h>

#include "photosplat/camera.hpp"
#include "photosplat/loss.hpp"
#include "photosplat/random.hpp"

namespace {

constexpr std::size_t kWidth = 96;
constexpr std::size_t kHeight = 96;

photosplat::TensorPtr make_noise_image(std::uint64_t seed) {
  auto t = photosplat::Tensor::create({kHeight, kWidth, 3});
  photosplat::Rng rng(seed);
  for (std::size_t i = 0; i < t->size(); ++i)
    t->set(i, rng.uniform(0.0, 1.0));
  return t;
}

void BM_DiskConv(benchmark::State& state) {
  auto image = make_noise_image(3);
  double radius = static_cast<double>(state.range(0));
  for (auto _ : state) {
    auto out = photosplat::disk_conv2d(image, radius);
    benchmark::DoNotOptimize(out->data());
  }
}
BENCHMARK(BM_DiskConv)->Arg(2)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_CameraEvalMaps(benchmark::State& state) {
  photosplat::CameraSettings settings;
  auto camera = photosplat::init_identity(settings, 11);
  camera.set_requires_grad(false);
  for (auto _ : state) {
    auto maps = photosplat::eval_maps(camera, kWidth, kHeight);
    benchmark::DoNotOptimize(maps.gamma->data());
  }
}
BENCHMARK(BM_CameraEvalMaps)->Unit(benchmark::kMillisecond);

void BM_CameraApply(benchmark::State& state) {
  photosplat::CameraSettings settings;
  settings.r_coc_px = 2.0;
  auto camera = photosplat::init_identity(settings, 11);
  camera.set_requires_grad(false);
  auto radiance = make_noise_image(5);
  for (auto _ : state) {
    auto out = photosplat::apply(camera, radiance);
    benchmark::DoNotOptimize(out->data());
  }
}
BENCHMARK(BM_CameraApply)->Unit(benchmark::kMillisecond);

void BM_Dssim(benchmark::State& state) {
  auto a = make_noise_image(3);
  auto b = make_noise_image(5);
  for (auto _ : state) {
    auto out = photosplat::dssim(a, b);
    benchmark::DoNotOptimize(out->data());
  }
}
BENCHMARK(BM_Dssim)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
