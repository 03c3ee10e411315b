#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "photosplat/loss.hpp"
#include "photosplat/random.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

using namespace photosplat;
using photosplat::testing::gradcheck;

namespace {

TensorPtr random_image(std::size_t h, std::size_t w, std::size_t c, Rng& rng,
                       double lo = 0.0, double hi = 1.0) {
  auto t = Tensor::create({h, w, c});
  for (std::size_t i = 0; i < t->size(); ++i) t->set(i, rng.uniform(lo, hi));
  return t;
}

TensorPtr constant_image(std::size_t h, std::size_t w, std::size_t c,
                         double value) {
  auto t = Tensor::create({h, w, c});
  t->fill(value);
  return t;
}

}  // namespace

TEST_CASE("window taps are normalized and symmetric") {
  auto k = gaussian_window(11, 1.5);
  REQUIRE(k.size() == 11);
  double total = 0.0;
  for (double v : k) total += v;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < 5; ++i) CHECK(k[i] == doctest::Approx(k[10 - i]));
  CHECK(k[5] > k[4]);
}

TEST_CASE("identical images have zero dissimilarity") {
  Rng rng(7);
  auto a = random_image(14, 17, 3, rng);
  auto d = dssim(a, a);
  CHECK(std::fabs(d->at(0)) <= 1e-12);
}

TEST_CASE("zero-variance pair matches the closed form") {
  auto a = constant_image(32, 32, 1, 0.5);
  auto b = constant_image(32, 32, 1, 0.6);
  // SSIM = (2*0.5*0.6 + 1e-4) / (0.5^2 + 0.6^2 + 1e-4) = 0.6001/0.6101.
  const double frozen_ssim = 0.98360924438616615;
  auto d = dssim(a, b);
  CHECK(std::fabs(d->at(0) - (1.0 - frozen_ssim) / 2.0) <= 1e-12);

  auto a3 = constant_image(32, 32, 3, 0.5);
  auto b3 = constant_image(32, 32, 3, 0.6);
  CHECK(std::fabs(dssim(a3, b3)->at(0) - d->at(0)) <= 1e-12);
}

TEST_CASE("dissimilarity stays in the unit interval") {
  Rng rng(19);
  for (int trial = 0; trial < 8; ++trial) {
    auto a = random_image(12, 15, 3, rng);
    auto b = random_image(12, 15, 3, rng);
    const double d = dssim(a, b)->at(0);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
  }
}

TEST_CASE("windowed similarity matches the direct reference") {
  Rng rng(23);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Rng local(seed);
    auto a = random_image(16, 13, 3, local);
    auto b = random_image(16, 13, 3, local);
    const double ours = 1.0 - 2.0 * dssim(a, b)->at(0);
    const double ref =
        testing::brute_ssim(a->values(), b->values(), 16, 13, 3);
    CHECK(std::fabs(ours - ref) <= 1e-9);
  }
  auto a1 = random_image(11, 24, 1, rng);
  auto b1 = random_image(11, 24, 1, rng);
  const double ours = 1.0 - 2.0 * dssim(a1, b1)->at(0);
  CHECK(std::fabs(ours - testing::brute_ssim(a1->values(), b1->values(), 11,
                                             24, 1)) <= 1e-9);
}

TEST_CASE("images smaller than the window are rejected") {
  Rng rng(31);
  auto small_h = random_image(10, 32, 3, rng);
  auto small_w = random_image(32, 10, 3, rng);
  auto ok = random_image(32, 32, 3, rng);
  CHECK_THROWS_AS((void)dssim(small_h, small_h), Error);
  CHECK_THROWS_AS((void)dssim(small_w, small_w), Error);
  CHECK_THROWS_AS((void)dssim(ok, small_h), Error);
}

TEST_CASE("blended loss endpoints and the constant case") {
  Rng rng(37);
  auto a = random_image(16, 16, 3, rng);
  CHECK(std::fabs(photometric_loss(a, a, 0.2)->at(0)) <= 1e-12);

  auto c5 = constant_image(16, 16, 3, 0.5);
  auto c6 = constant_image(16, 16, 3, 0.6);
  CHECK(photometric_loss(c5, c6, 0.0)->at(0) ==
        doctest::Approx(0.1).epsilon(1e-12));

  auto b = random_image(16, 16, 3, rng);
  const double ds = dssim(a, b)->at(0);
  CHECK(photometric_loss(a, b, 1.0)->at(0) ==
        doctest::Approx(ds).epsilon(1e-12));

  const double l1 = mean(abs(sub(a, b)))->at(0);
  const double mixed = photometric_loss(a, b, 0.2)->at(0);
  CHECK(mixed == doctest::Approx(0.8 * l1 + 0.2 * ds).epsilon(1e-12));
  CHECK(mixed >= 0.0);
}

TEST_CASE("gradients of the dissimilarity match finite differences") {
  Rng rng(41);
  auto a = random_image(12, 12, 1, rng, 0.2, 0.8);
  auto b = random_image(12, 12, 1, rng, 0.2, 0.8);
  auto res = gradcheck([&] { return dssim(a, b); }, {a, b}, 1e-4);
  CHECK(res.max_rel_error <= 1e-5);
}

TEST_CASE("gradients of the blended loss match finite differences") {
  Rng rng(43);
  auto pred = random_image(12, 12, 3, rng, 0.3, 0.45);
  // Keep |pred - target| bounded away from zero so the L1 kink is never
  // crossed by the finite-difference probes.
  auto target = Tensor::create(pred->shape());
  for (std::size_t i = 0; i < target->size(); ++i)
    target->set(i, pred->at(i) + rng.uniform(0.15, 0.3));
  auto res =
      gradcheck([&] { return photometric_loss(pred, target, 0.2); }, {pred});
  CHECK(res.max_rel_error <= 1e-6);
}
