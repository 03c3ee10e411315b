#include "photosplat/loss.hpp"

#include <cmath>

#include "photosplat/common.hpp"

namespace photosplat {

namespace {

constexpr std::size_t kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

TensorPtr as_hwc(const TensorPtr& x) {
  if (x->rank() == 3) return x;
  require(x->rank() == 2, "dssim: expected [H,W] or [H,W,C], got shape ",
          x->shape_str());
  return reshape(x, {x->dim(0), x->dim(1), 1});
}

}  // namespace

std::vector<double> gaussian_window(std::size_t size, double sigma) {
  require(size >= 1 && sigma > 0.0, "gaussian_window: bad parameters");
  std::vector<double> k(size);
  const double c = 0.5 * static_cast<double>(size - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - c;
    k[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += k[i];
  }
  for (auto& v : k) v /= total;
  return k;
}

TensorPtr dssim(const TensorPtr& a_in, const TensorPtr& b_in) {
  auto a = as_hwc(a_in);
  auto b = as_hwc(b_in);
  require(Tensor::same_shape(*a, *b), "dssim: shape mismatch ", a->shape_str(),
          " vs ", b->shape_str());
  require(a->dim(0) >= kWindow && a->dim(1) >= kWindow, "dssim: image ",
          a->shape_str(), " smaller than the ", kWindow, "x", kWindow,
          " window");

  static const std::vector<double> win = gaussian_window(kWindow, kSigma);

  auto mu_a = sep_conv2d_valid(a, win);
  auto mu_b = sep_conv2d_valid(b, win);
  auto e_aa = sep_conv2d_valid(mul(a, a), win);
  auto e_bb = sep_conv2d_valid(mul(b, b), win);
  auto e_ab = sep_conv2d_valid(mul(a, b), win);

  auto mu_ab = mul(mu_a, mu_b);
  auto var_a = sub(e_aa, mul(mu_a, mu_a));
  auto var_b = sub(e_bb, mul(mu_b, mu_b));
  auto cov = sub(e_ab, mu_ab);

  auto num = mul(add_scalar(mul_scalar(mu_ab, 2.0), kC1),
                 add_scalar(mul_scalar(cov, 2.0), kC2));
  auto den = mul(add_scalar(add(mul(mu_a, mu_a), mul(mu_b, mu_b)), kC1),
                 add_scalar(add(var_a, var_b), kC2));
  auto ssim = mean(div(num, den));
  return mul_scalar(add_scalar(mul_scalar(ssim, -1.0), 1.0), 0.5);
}

TensorPtr photometric_loss(const TensorPtr& pred, const TensorPtr& target,
                           double lambda) {
  require(Tensor::same_shape(*pred, *target),
          "photometric_loss: shape mismatch ", pred->shape_str(), " vs ",
          target->shape_str());
  require(lambda >= 0.0 && lambda <= 1.0, "photometric_loss: lambda ", lambda,
          " outside [0,1]");
  auto l1 = mean(abs(sub(pred, target)));
  if (lambda == 0.0) return l1;
  auto ds = dssim(pred, target);
  if (lambda == 1.0) return ds;
  return add(mul_scalar(l1, 1.0 - lambda), mul_scalar(ds, lambda));
}

}  // namespace photosplat
