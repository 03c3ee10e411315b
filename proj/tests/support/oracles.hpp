#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "photosplat/gaussians.hpp"

namespace photosplat::testing {

// Naive O(HWk) disk-mean reference. Scans the full square window per output
// pixel and re-derives membership from the center distance each time.
inline std::vector<double> brute_disk_conv(const std::vector<double>& img,
                                           std::size_t h, std::size_t w,
                                           std::size_t c, double radius) {
  std::vector<double> out(img.size(), 0.0);
  const int reach = static_cast<int>(std::ceil(radius));
  for (int y = 0; y < static_cast<int>(h); ++y)
    for (int x = 0; x < static_cast<int>(w); ++x) {
      std::size_t count = 0;
      std::vector<double> acc(c, 0.0);
      for (int yy = y - reach; yy <= y + reach; ++yy)
        for (int xx = x - reach; xx <= x + reach; ++xx) {
          if (yy < 0 || yy >= static_cast<int>(h) || xx < 0 ||
              xx >= static_cast<int>(w))
            continue;
          const double dy = yy - y, dx = xx - x;
          if (std::sqrt(dy * dy + dx * dx) > radius) continue;
          ++count;
          for (std::size_t ch = 0; ch < c; ++ch)
            acc[ch] += img[(static_cast<std::size_t>(yy) * w + xx) * c + ch];
        }
      for (std::size_t ch = 0; ch < c; ++ch)
        out[(static_cast<std::size_t>(y) * w + x) * c + ch] =
            acc[ch] / static_cast<double>(count);
    }
  return out;
}

// Reference splatting render: per-pixel full sort, no early termination, no
// raster-box pruning, 2x2 covariance inverted directly. Hand-rolled linear
// algebra so nothing is shared with the production path beyond the model
// definition itself.
inline std::vector<double> brute_render(const GaussianCloud& cloud,
                                        const CameraView& view,
                                        const std::array<double, 3>& bg,
                                        double alpha_clamp = 0.99,
                                        double z_near = 0.01,
                                        double cov_floor = 0.3) {
  const std::size_t n = cloud.size();
  const std::size_t w = view.width, h = view.height;
  const auto& m = view.world_to_camera;

  struct Splat {
    double z, mx, my, inv00, inv01, inv11, opacity;
    double color[3];
    std::size_t idx;
  };
  std::vector<Splat> splats;
  for (std::size_t gi = 0; gi < n; ++gi) {
    const double px = cloud.centers->at(gi * 3 + 0);
    const double py = cloud.centers->at(gi * 3 + 1);
    const double pz = cloud.centers->at(gi * 3 + 2);
    const double cx_cam = m[0] * px + m[1] * py + m[2] * pz + m[3];
    const double cy_cam = m[4] * px + m[5] * py + m[6] * pz + m[7];
    const double cz_cam = m[8] * px + m[9] * py + m[10] * pz + m[11];
    if (cz_cam <= z_near) continue;

    double qw = cloud.rotations->at(gi * 4 + 0);
    double qx = cloud.rotations->at(gi * 4 + 1);
    double qy = cloud.rotations->at(gi * 4 + 2);
    double qz = cloud.rotations->at(gi * 4 + 3);
    const double qn = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
    qw /= qn;
    qx /= qn;
    qy /= qn;
    qz /= qn;
    const double rot[3][3] = {
        {1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qw * qz),
         2 * (qx * qz + qw * qy)},
        {2 * (qx * qy + qw * qz), 1 - 2 * (qx * qx + qz * qz),
         2 * (qy * qz - qw * qx)},
        {2 * (qx * qz - qw * qy), 2 * (qy * qz + qw * qx),
         1 - 2 * (qx * qx + qy * qy)}};
    double d[3];
    for (int k = 0; k < 3; ++k)
      d[k] = std::exp(2.0 * cloud.log_scales->at(gi * 3 + k));
    double sigma[3][3];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        sigma[i][j] = 0.0;
        for (int k = 0; k < 3; ++k)
          sigma[i][j] += rot[i][k] * d[k] * rot[j][k];
      }
    // T = J * W_r, rows of the 2x3 screen-space transform.
    const double jac[2][3] = {
        {view.fx / cz_cam, 0.0, -view.fx * cx_cam / (cz_cam * cz_cam)},
        {0.0, view.fy / cz_cam, -view.fy * cy_cam / (cz_cam * cz_cam)}};
    double t2[2][3];
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j)
        t2[i][j] = jac[i][0] * m[0 + j] + jac[i][1] * m[4 + j] +
                   jac[i][2] * m[8 + j];
    double cov[2][2] = {{0, 0}, {0, 0}};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            cov[i][j] += t2[i][r] * sigma[r][c] * t2[j][c];
    cov[0][0] += cov_floor;
    cov[1][1] += cov_floor;
    const double det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];

    Splat s;
    s.z = cz_cam;
    s.mx = view.fx * cx_cam / cz_cam + view.cx;
    s.my = view.fy * cy_cam / cz_cam + view.cy;
    s.inv00 = cov[1][1] / det;
    s.inv01 = -cov[0][1] / det;
    s.inv11 = cov[0][0] / det;
    {
      const double l = cloud.opacity_logits->at(gi);
      s.opacity = 1.0 / (1.0 + std::exp(-l));
    }
    for (int ch = 0; ch < 3; ++ch) {
      const double l = cloud.color_logits->at(gi * 3 + ch);
      s.color[ch] = 1.0 / (1.0 + std::exp(-l));
    }
    s.idx = gi;
    splats.push_back(s);
  }
  std::sort(splats.begin(), splats.end(), [](const Splat& a, const Splat& b) {
    return a.z != b.z ? a.z < b.z : a.idx < b.idx;
  });

  std::vector<double> img(w * h * 3, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double t = 1.0;
      double acc[3] = {0, 0, 0};
      for (const auto& s : splats) {
        const double dx = static_cast<double>(x) - s.mx;
        const double dy = static_cast<double>(y) - s.my;
        const double mahal =
            s.inv00 * dx * dx + 2.0 * s.inv01 * dx * dy + s.inv11 * dy * dy;
        const double alpha =
            std::min(alpha_clamp, s.opacity * std::exp(-0.5 * mahal));
        for (int ch = 0; ch < 3; ++ch) acc[ch] += s.color[ch] * alpha * t;
        t *= 1.0 - alpha;
      }
      for (int ch = 0; ch < 3; ++ch)
        img[(y * w + x) * 3 + ch] = acc[ch] + bg[ch] * t;
    }
  return img;
}

// Direct SSIM over HWC buffers: explicit 2D 11x11 Gaussian window per valid
// position, nothing separable, no shared code with the differentiable path.
inline double brute_ssim(const std::vector<double>& a,
                         const std::vector<double>& b, std::size_t h,
                         std::size_t w, std::size_t c) {
  constexpr int k = 11;
  constexpr double sigma = 1.5;
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  double win[k][k];
  double wsum = 0.0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double di = i - (k - 1) / 2.0, dj = j - (k - 1) / 2.0;
      win[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
      wsum += win[i][j];
    }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) win[i][j] /= wsum;

  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y + k <= h; ++y)
      for (std::size_t x = 0; x + k <= w; ++x) {
        double ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) {
            const double va = a[((y + i) * w + (x + j)) * c + ch];
            const double vb = b[((y + i) * w + (x + j)) * c + ch];
            ma += win[i][j] * va;
            mb += win[i][j] * vb;
            maa += win[i][j] * va * va;
            mbb += win[i][j] * vb * vb;
            mab += win[i][j] * va * vb;
          }
        const double var_a = maa - ma * ma;
        const double var_b = mbb - mb * mb;
        const double cov = mab - ma * mb;
        total += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                 ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
        ++count;
      }
  return total / static_cast<double>(count);
}

}  // namespace photosplat::testing
