#include <benchmark/benchmark.h>

#include "photosplat/loss.hpp"
#include "photosplat/synth.hpp"

namespace {

struct RenderFixture {
  photosplat::GaussianCloud cloud;
  photosplat::CameraView view;
  photosplat::RenderOptions opts;
  photosplat::TensorPtr target;

  RenderFixture() {
    cloud = photosplat::make_preset_cloud("boxgrid", 7);
    photosplat::OrbitParams orbit;
    view = photosplat::make_orbit_views(orbit, 7).front();
    opts.background = {0.4, 0.4, 0.4};
    target = photosplat::render(cloud, view, opts).image;
  }
};

RenderFixture& fixture() {
  static RenderFixture f;
  return f;
}

void BM_RenderForward(benchmark::State& state) {
  auto& f = fixture();
  f.cloud.set_requires_grad(false);
  for (auto _ : state) {
    auto result = photosplat::render(f.cloud, f.view, f.opts);
    benchmark::DoNotOptimize(result.image->data());
  }
}
BENCHMARK(BM_RenderForward)->Unit(benchmark::kMillisecond);

void BM_RenderBackward(benchmark::State& state) {
  auto& f = fixture();
  f.cloud.set_requires_grad(true);
  for (auto _ : state) {
    photosplat::Tape tape;
    photosplat::TapeGuard guard(tape);
    f.cloud.zero_grad();
    auto result = photosplat::render(f.cloud, f.view, f.opts);
    auto loss = photosplat::photometric_loss(result.image, f.target, 0.2);
    photosplat::backward(tape, loss);
    benchmark::DoNotOptimize(f.cloud.centers->grad());
  }
}
BENCHMARK(BM_RenderBackward)->Unit(benchmark::kMillisecond);

void BM_ProjectGaussians(benchmark::State& state) {
  auto& f = fixture();
  f.cloud.set_requires_grad(false);
  for (auto _ : state) {
    auto projected = photosplat::project_gaussians(f.cloud, f.view, f.opts);
    benchmark::DoNotOptimize(projected.data());
  }
}
BENCHMARK(BM_ProjectGaussians)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
