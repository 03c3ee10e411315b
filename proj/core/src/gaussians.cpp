#include "photosplat/gaussians.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "photosplat/common.hpp"
#include "photosplat/ops.hpp"

namespace photosplat {

namespace {

using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

Mat3 rotation_block(const std::array<double, 16>& m) {
  Mat3 r;
  r << m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10];
  return r;
}

Vec3 translation_part(const std::array<double, 16>& m) {
  return Vec3(m[3], m[7], m[11]);
}

Mat3 quat_to_rotmat(double w, double x, double y, double z) {
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

// Everything recomputable about one projected Gaussian that the backward
// pass needs beyond the public ProjectedGaussian record.
struct ProjIntermediate {
  Vec3 p_cam;
  Mat3 rot;
  Vec3 scale_sq;
  Mat3 sigma3;
  Mat23 v;  // J * W_r
  double qhat[4];
  double qnorm = 0;
};

// Returns false when the Gaussian is culled (behind z_near or raster box
// off-image).
bool compute_projection(const GaussianCloud& cloud, std::size_t gi,
                        const CameraView& view, const Mat3& w_r,
                        const Vec3& w_t, const RenderOptions& opts,
                        ProjectedGaussian* pg, ProjIntermediate* inter) {
  const double* ctr = cloud.centers->data() + gi * 3;
  const Vec3 p_world(ctr[0], ctr[1], ctr[2]);
  const Vec3 p_cam = w_r * p_world + w_t;
  const double z = p_cam.z();
  if (z <= opts.z_near) return false;

  const double qw = cloud.rotations->at(gi * 4 + 0);
  const double qx = cloud.rotations->at(gi * 4 + 1);
  const double qy = cloud.rotations->at(gi * 4 + 2);
  const double qz = cloud.rotations->at(gi * 4 + 3);
  const double qnorm = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
  require(qnorm > 1e-12, "degenerate quaternion on gaussian ", gi);
  const double iw = qw / qnorm, ix = qx / qnorm, iy = qy / qnorm,
               iz = qz / qnorm;
  const Mat3 rot = quat_to_rotmat(iw, ix, iy, iz);

  const double* ls = cloud.log_scales->data() + gi * 3;
  const Vec3 scale_sq(std::exp(2.0 * ls[0]), std::exp(2.0 * ls[1]),
                      std::exp(2.0 * ls[2]));
  const Mat3 sigma3 = rot * scale_sq.asDiagonal() * rot.transpose();

  const double inv_z = 1.0 / z;
  Mat23 jac;
  jac << view.fx * inv_z, 0.0, -view.fx * p_cam.x() * inv_z * inv_z, 0.0,
      view.fy * inv_z, -view.fy * p_cam.y() * inv_z * inv_z;
  const Mat23 v = jac * w_r;
  const Mat2 cov2d_raw = v * sigma3 * v.transpose();
  const double a = cov2d_raw(0, 0) + opts.cov2d_floor;
  const double b = cov2d_raw(0, 1);
  const double c = cov2d_raw(1, 1) + opts.cov2d_floor;
  const double det = a * c - b * b;
  require(det > 0.0, "non positive-definite 2d covariance on gaussian ", gi);

  pg->index = gi;
  pg->mean_x = view.fx * p_cam.x() * inv_z + view.cx;
  pg->mean_y = view.fy * p_cam.y() * inv_z + view.cy;
  pg->cov_a = a;
  pg->cov_b = b;
  pg->cov_c = c;
  pg->conic_a = c / det;
  pg->conic_b = -b / det;
  pg->conic_c = a / det;
  pg->depth = z;
  pg->inv_depth = inv_z;

  const double reach_x = std::sqrt(2.0 * opts.prune_power * a);
  const double reach_y = std::sqrt(2.0 * opts.prune_power * c);
  pg->x_lo = std::max(0, static_cast<int>(std::ceil(pg->mean_x - reach_x)));
  pg->x_hi = std::min(static_cast<int>(view.width) - 1,
                      static_cast<int>(std::floor(pg->mean_x + reach_x)));
  pg->y_lo = std::max(0, static_cast<int>(std::ceil(pg->mean_y - reach_y)));
  pg->y_hi = std::min(static_cast<int>(view.height) - 1,
                      static_cast<int>(std::floor(pg->mean_y + reach_y)));
  if (pg->x_lo > pg->x_hi || pg->y_lo > pg->y_hi) return false;

  if (inter) {
    inter->p_cam = p_cam;
    inter->rot = rot;
    inter->scale_sq = scale_sq;
    inter->sigma3 = sigma3;
    inter->v = v;
    inter->qhat[0] = iw;
    inter->qhat[1] = ix;
    inter->qhat[2] = iy;
    inter->qhat[3] = iz;
    inter->qnorm = qnorm;
  }
  return true;
}

// Projection, depth sort, raster-box binning, and per-splat shading inputs,
// shared by the renders and the backward pass.
struct RasterPlan {
  std::vector<ProjectedGaussian> splats;  // front-to-back
  std::vector<std::uint32_t> offsets;     // CSR over pixels
  std::vector<std::uint32_t> lists;       // splat indices per pixel
  std::vector<double> opacity;            // per splat, post-sigmoid
  std::vector<double> color;              // per splat x3, post-sigmoid
};

RasterPlan build_plan(const GaussianCloud& cloud, const CameraView& view,
                      const RenderOptions& opts) {
  RasterPlan plan;
  const Mat3 w_r = rotation_block(view.world_to_camera);
  const Vec3 w_t = translation_part(view.world_to_camera);
  plan.splats.reserve(cloud.size());
  ProjectedGaussian pg;
  for (std::size_t gi = 0; gi < cloud.size(); ++gi)
    if (compute_projection(cloud, gi, view, w_r, w_t, opts, &pg, nullptr))
      plan.splats.push_back(pg);
  std::stable_sort(plan.splats.begin(), plan.splats.end(),
                   [](const ProjectedGaussian& l, const ProjectedGaussian& r) {
                     return l.depth < r.depth;
                   });

  const std::size_t n_pix = view.width * view.height;
  plan.offsets.assign(n_pix + 1, 0);
  for (const auto& s : plan.splats)
    for (int y = s.y_lo; y <= s.y_hi; ++y)
      for (int x = s.x_lo; x <= s.x_hi; ++x)
        ++plan.offsets[static_cast<std::size_t>(y) * view.width + x + 1];
  for (std::size_t i = 1; i <= n_pix; ++i)
    plan.offsets[i] += plan.offsets[i - 1];
  plan.lists.resize(plan.offsets[n_pix]);
  std::vector<std::uint32_t> cursor(plan.offsets.begin(),
                                    plan.offsets.end() - 1);
  for (std::uint32_t si = 0; si < plan.splats.size(); ++si) {
    const auto& s = plan.splats[si];
    for (int y = s.y_lo; y <= s.y_hi; ++y)
      for (int x = s.x_lo; x <= s.x_hi; ++x)
        plan.lists[cursor[static_cast<std::size_t>(y) * view.width + x]++] =
            si;
  }

  plan.opacity.resize(plan.splats.size());
  plan.color.resize(plan.splats.size() * 3);
  for (std::size_t si = 0; si < plan.splats.size(); ++si) {
    const std::size_t gi = plan.splats[si].index;
    plan.opacity[si] = sigmoid_scalar(cloud.opacity_logits->at(gi));
    for (std::size_t ch = 0; ch < 3; ++ch)
      plan.color[si * 3 + ch] =
          sigmoid_scalar(cloud.color_logits->at(gi * 3 + ch));
  }
  return plan;
}

double splat_power(const ProjectedGaussian& s, double px, double py) {
  const double dx = px - s.mean_x;
  const double dy = py - s.mean_y;
  return -0.5 * (s.conic_a * dx * dx + s.conic_c * dy * dy) -
         s.conic_b * dx * dy;
}

class RenderNode final : public TapeNode {
 public:
  RenderNode(GaussianCloud cloud, CameraView view, RenderOptions opts,
             RasterPlan plan, std::vector<std::uint32_t> processed,
             TensorPtr image)
      : cloud_(std::move(cloud)),
        view_(view),
        opts_(opts),
        plan_(std::move(plan)),
        processed_(std::move(processed)),
        image_(std::move(image)) {}

  void backward() override;

 private:
  GaussianCloud cloud_;
  CameraView view_;
  RenderOptions opts_;
  RasterPlan plan_;
  std::vector<std::uint32_t> processed_;
  TensorPtr image_;
};

void RenderNode::backward() {
  const std::size_t w = view_.width, h = view_.height;
  const std::size_t n_splats = plan_.splats.size();

  std::vector<double> g_mean_x(n_splats, 0.0), g_mean_y(n_splats, 0.0);
  std::vector<double> g_conic_a(n_splats, 0.0), g_conic_b(n_splats, 0.0),
      g_conic_c(n_splats, 0.0);
  std::vector<double> g_opacity(n_splats, 0.0), g_color(n_splats * 3, 0.0);

  struct Step {
    std::uint32_t si;
    double alpha;
    double t_before;
    double g;
  };
  std::vector<Step> steps;

  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t pix = y * w + x;
      const double* gimg = image_->grad() + pix * 3;
      if (gimg[0] == 0.0 && gimg[1] == 0.0 && gimg[2] == 0.0) continue;

      const std::uint32_t n = processed_[pix];
      steps.clear();
      double t = 1.0;
      for (std::uint32_t k = 0; k < n; ++k) {
        const std::uint32_t si = plan_.lists[plan_.offsets[pix] + k];
        const auto& s = plan_.splats[si];
        const double g = std::exp(splat_power(s, static_cast<double>(x),
                                              static_cast<double>(y)));
        const double alpha =
            std::min(opts_.alpha_clamp, plan_.opacity[si] * g);
        steps.push_back({si, alpha, t, g});
        t *= 1.0 - alpha;
      }

      double suffix[3] = {opts_.background[0] * t, opts_.background[1] * t,
                          opts_.background[2] * t};
      for (std::size_t k = steps.size(); k-- > 0;) {
        const Step& st = steps[k];
        const auto& s = plan_.splats[st.si];
        const double weight = st.alpha * st.t_before;
        const double* col = &plan_.color[st.si * 3];

        double g_alpha = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
          g_color[st.si * 3 + ch] += gimg[ch] * weight;
          g_alpha += gimg[ch] *
                     (col[ch] * st.t_before - suffix[ch] / (1.0 - st.alpha));
        }
        if (plan_.opacity[st.si] * st.g < opts_.alpha_clamp) {
          g_opacity[st.si] += g_alpha * st.g;
          const double g_power = g_alpha * plan_.opacity[st.si] * st.g;
          const double dx = static_cast<double>(x) - s.mean_x;
          const double dy = static_cast<double>(y) - s.mean_y;
          g_conic_a[st.si] += g_power * (-0.5 * dx * dx);
          g_conic_b[st.si] += g_power * (-dx * dy);
          g_conic_c[st.si] += g_power * (-0.5 * dy * dy);
          g_mean_x[st.si] += g_power * (s.conic_a * dx + s.conic_b * dy);
          g_mean_y[st.si] += g_power * (s.conic_b * dx + s.conic_c * dy);
        }
        for (int ch = 0; ch < 3; ++ch) suffix[ch] += col[ch] * weight;
      }
    }

  // Per-splat chain from screen-space gradients into the cloud leaves.
  const Mat3 w_r = rotation_block(view_.world_to_camera);
  const Vec3 w_t = translation_part(view_.world_to_camera);
  ProjectedGaussian pg;
  ProjIntermediate inter;
  for (std::size_t si = 0; si < n_splats; ++si) {
    const std::size_t gi = plan_.splats[si].index;

    const double o = plan_.opacity[si];
    cloud_.opacity_logits->grad()[gi] += g_opacity[si] * o * (1.0 - o);
    for (int ch = 0; ch < 3; ++ch) {
      const double c = plan_.color[si * 3 + ch];
      cloud_.color_logits->grad()[gi * 3 + ch] +=
          g_color[si * 3 + ch] * c * (1.0 - c);
    }

    if (g_mean_x[si] == 0.0 && g_mean_y[si] == 0.0 && g_conic_a[si] == 0.0 &&
        g_conic_b[si] == 0.0 && g_conic_c[si] == 0.0)
      continue;

    const bool ok =
        compute_projection(cloud_, gi, view_, w_r, w_t, opts_, &pg, &inter);
    require(ok, "projection changed between forward and backward");

    const double a = pg.cov_a, b = pg.cov_b, c = pg.cov_c;
    const double det = a * c - b * b;
    const double inv_det2 = 1.0 / (det * det);
    const double ga_cov =
        (-c * c * g_conic_a[si] + b * c * g_conic_b[si] -
         b * b * g_conic_c[si]) *
        inv_det2;
    const double gb_cov =
        (2.0 * b * c * g_conic_a[si] - (det + 2.0 * b * b) * g_conic_b[si] +
         2.0 * a * b * g_conic_c[si]) *
        inv_det2;
    const double gc_cov =
        (-b * b * g_conic_a[si] + a * b * g_conic_b[si] -
         a * a * g_conic_c[si]) *
        inv_det2;

    Mat2 g_m;
    g_m << ga_cov, gb_cov, 0.0, gc_cov;
    const Mat3 g_sigma3 = inter.v.transpose() * g_m * inter.v;
    const Mat23 g_v = (g_m + g_m.transpose()) * inter.v * inter.sigma3;
    const Mat23 g_jac = g_v * w_r.transpose();

    const double z = inter.p_cam.z();
    const double inv_z = 1.0 / z, inv_z2 = inv_z * inv_z,
                 inv_z3 = inv_z2 * inv_z;
    const double fx = view_.fx, fy = view_.fy;
    double gx_cam = g_jac(0, 2) * (-fx * inv_z2);
    double gy_cam = g_jac(1, 2) * (-fy * inv_z2);
    double gz_cam = g_jac(0, 0) * (-fx * inv_z2) +
                    g_jac(1, 1) * (-fy * inv_z2) +
                    g_jac(0, 2) * (2.0 * fx * inter.p_cam.x() * inv_z3) +
                    g_jac(1, 2) * (2.0 * fy * inter.p_cam.y() * inv_z3);
    gx_cam += g_mean_x[si] * fx * inv_z;
    gy_cam += g_mean_y[si] * fy * inv_z;
    gz_cam += -g_mean_x[si] * fx * inter.p_cam.x() * inv_z2 -
              g_mean_y[si] * fy * inter.p_cam.y() * inv_z2;
    const Vec3 g_center = w_r.transpose() * Vec3(gx_cam, gy_cam, gz_cam);
    for (int k = 0; k < 3; ++k)
      cloud_.centers->grad()[gi * 3 + k] += g_center[k];

    const Mat3 rtgr = inter.rot.transpose() * g_sigma3 * inter.rot;
    for (int k = 0; k < 3; ++k)
      cloud_.log_scales->grad()[gi * 3 + k] +=
          2.0 * inter.scale_sq[k] * rtgr(k, k);

    const Mat3 g_rot = (g_sigma3 + g_sigma3.transpose()) * inter.rot *
                       inter.scale_sq.asDiagonal();
    const double qw = inter.qhat[0], qx = inter.qhat[1], qy = inter.qhat[2],
                 qz = inter.qhat[3];
    Mat3 dr_dw, dr_dx, dr_dy, dr_dz;
    dr_dw << 0, -qz, qy, qz, 0, -qx, -qy, qx, 0;
    dr_dx << 0, qy, qz, qy, -2 * qx, -qw, qz, qw, -2 * qx;
    dr_dy << -2 * qy, qx, qw, qx, 0, qz, -qw, qz, -2 * qy;
    dr_dz << -2 * qz, -qw, qx, qw, -2 * qz, qy, qx, qy, 0;
    Eigen::Vector4d g_qhat(
        2.0 * (g_rot.array() * dr_dw.array()).sum(),
        2.0 * (g_rot.array() * dr_dx.array()).sum(),
        2.0 * (g_rot.array() * dr_dy.array()).sum(),
        2.0 * (g_rot.array() * dr_dz.array()).sum());
    const Eigen::Vector4d qhat(qw, qx, qy, qz);
    const Eigen::Vector4d g_q =
        (g_qhat - qhat * qhat.dot(g_qhat)) / inter.qnorm;
    for (int k = 0; k < 4; ++k)
      cloud_.rotations->grad()[gi * 4 + k] += g_q[k];
  }
}

}  // namespace

void CameraView::validate() const {
  require(fx > 0 && fy > 0, "camera: focal lengths must be positive");
  require(width > 0 && height > 0, "camera: empty image plane");
  require(cx > 0 && cx < static_cast<double>(width) && cy > 0 &&
              cy < static_cast<double>(height),
          "camera: principal point outside the image");
  const Mat3 r = rotation_block(world_to_camera);
  const Mat3 err = r * r.transpose() - Mat3::Identity();
  require(err.cwiseAbs().maxCoeff() < 1e-6,
          "camera: rotation block is not orthonormal");
  require(r.determinant() > 0.0, "camera: rotation block is reflected");
  require(world_to_camera[12] == 0 && world_to_camera[13] == 0 &&
              world_to_camera[14] == 0 && world_to_camera[15] == 1,
          "camera: bottom row of the transform must be (0,0,0,1)");
}

CameraView make_look_at(const std::array<double, 3>& eye,
                        const std::array<double, 3>& target,
                        const std::array<double, 3>& up, double fx, double fy,
                        std::size_t width, std::size_t height) {
  const Vec3 e(eye[0], eye[1], eye[2]);
  const Vec3 t(target[0], target[1], target[2]);
  const Vec3 u(up[0], up[1], up[2]);
  const Vec3 fwd = (t - e).normalized();
  Vec3 right = u.cross(fwd);
  require(right.norm() > 1e-9, "look_at: view direction parallel to up");
  right.normalize();
  const Vec3 down = fwd.cross(right);

  CameraView view;
  view.fx = fx;
  view.fy = fy;
  view.width = width;
  view.height = height;
  view.cx = static_cast<double>(width) / 2.0;
  view.cy = static_cast<double>(height) / 2.0;
  Mat3 r;
  r.row(0) = right;
  r.row(1) = down;
  r.row(2) = fwd;
  const Vec3 trans = -(r * e);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) view.world_to_camera[i * 4 + j] = r(i, j);
    view.world_to_camera[i * 4 + 3] = trans[i];
  }
  view.world_to_camera[12] = view.world_to_camera[13] =
      view.world_to_camera[14] = 0.0;
  view.world_to_camera[15] = 1.0;
  return view;
}

GaussianCloud GaussianCloud::create(std::size_t n) {
  GaussianCloud cloud;
  cloud.centers = Tensor::create({n, 3});
  cloud.log_scales = Tensor::create({n, 3});
  cloud.rotations = Tensor::create({n, 4});
  cloud.opacity_logits = Tensor::create({n});
  cloud.color_logits = Tensor::create({n, 3});
  for (std::size_t i = 0; i < n; ++i) cloud.rotations->set(i * 4, 1.0);
  return cloud;
}

void GaussianCloud::set_requires_grad(bool rg) {
  for (auto& p : params()) p->set_requires_grad(rg);
}

void GaussianCloud::zero_grad() {
  for (auto& p : params()) p->zero_grad();
}

std::vector<TensorPtr> GaussianCloud::params() const {
  return {centers, log_scales, rotations, opacity_logits, color_logits};
}

std::vector<ProjectedGaussian> project_gaussians(const GaussianCloud& cloud,
                                                 const CameraView& view,
                                                 const RenderOptions& opts) {
  view.validate();
  const Mat3 w_r = rotation_block(view.world_to_camera);
  const Vec3 w_t = translation_part(view.world_to_camera);
  std::vector<ProjectedGaussian> out;
  out.reserve(cloud.size());
  ProjectedGaussian pg;
  for (std::size_t gi = 0; gi < cloud.size(); ++gi)
    if (compute_projection(cloud, gi, view, w_r, w_t, opts, &pg, nullptr))
      out.push_back(pg);
  return out;
}

RenderResult render(const GaussianCloud& cloud, const CameraView& view,
                    const RenderOptions& opts) {
  view.validate();
  const std::size_t w = view.width, h = view.height;
  auto image = Tensor::create({h, w, 3});
  DepthStats stats;
  stats.width = w;
  stats.height = h;
  stats.mu_id.assign(w * h, 0.0);
  stats.sigma_id.assign(w * h, opts.sigma_min);
  stats.covered.assign(w * h, 0);

  RasterPlan plan = build_plan(cloud, view, opts);
  std::vector<std::uint32_t> processed(w * h, 0);

  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t pix = y * w + x;
      double t = 1.0;
      double acc[3] = {0.0, 0.0, 0.0};
      double sw = 0.0, swid = 0.0, swid2 = 0.0;
      std::uint32_t count = 0;
      for (std::uint32_t k = plan.offsets[pix]; k < plan.offsets[pix + 1];
           ++k) {
        const std::uint32_t si = plan.lists[k];
        const auto& s = plan.splats[si];
        const double g = std::exp(splat_power(s, static_cast<double>(x),
                                              static_cast<double>(y)));
        const double alpha = std::min(opts.alpha_clamp, plan.opacity[si] * g);
        const double weight = alpha * t;
        for (int ch = 0; ch < 3; ++ch)
          acc[ch] += plan.color[si * 3 + ch] * weight;
        sw += weight;
        swid += weight * s.inv_depth;
        swid2 += weight * s.inv_depth * s.inv_depth;
        t *= 1.0 - alpha;
        ++count;
        if (t < opts.transmittance_min) break;
      }
      for (int ch = 0; ch < 3; ++ch)
        image->data()[pix * 3 + ch] = acc[ch] + opts.background[ch] * t;
      processed[pix] = count;
      if (sw > 0.0) {
        const double mu = swid / sw;
        const double var = std::max(0.0, swid2 / sw - mu * mu);
        stats.mu_id[pix] = mu;
        stats.sigma_id[pix] = std::max(opts.sigma_min, std::sqrt(var));
        stats.covered[pix] = 1;
      }
    }

  bool needs_grad = false;
  for (const auto& p : cloud.params()) needs_grad |= p->requires_grad();
  image->set_requires_grad(needs_grad);
  if (needs_grad && Tape::active() && !plan.splats.empty())
    Tape::active()->record(std::make_unique<RenderNode>(
        cloud, view, opts, std::move(plan), std::move(processed), image));
  return {image, stats};
}

TensorPtr render_depth_regularized(const GaussianCloud& cloud,
                                   const CameraView& view,
                                   const DepthStats& stats,
                                   const RenderOptions& opts) {
  view.validate();
  require(stats.width == view.width && stats.height == view.height,
          "depth stats do not match the view size");
  const std::size_t w = view.width, h = view.height;
  auto image = Tensor::create({h, w, 3});
  RasterPlan plan = build_plan(cloud, view, opts);

  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t pix = y * w + x;
      const double mu = stats.mu_id[pix];
      const double sigma = stats.sigma_id[pix];
      const double inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma);
      double t = 1.0;
      double acc[3] = {0.0, 0.0, 0.0};
      for (std::uint32_t k = plan.offsets[pix]; k < plan.offsets[pix + 1];
           ++k) {
        const std::uint32_t si = plan.lists[k];
        const auto& s = plan.splats[si];
        const double g = std::exp(splat_power(s, static_cast<double>(x),
                                              static_cast<double>(y)));
        const double alpha = std::min(opts.alpha_clamp, plan.opacity[si] * g);
        const double dev = s.inv_depth - mu;
        const double g_inv =
            stats.covered[pix] ? std::exp(-dev * dev * inv_two_sigma2) : 1.0;
        for (int ch = 0; ch < 3; ++ch)
          acc[ch] += plan.color[si * 3 + ch] * alpha * g_inv * t;
        t *= 1.0 - alpha;
        if (t < opts.transmittance_min) break;
      }
      for (int ch = 0; ch < 3; ++ch)
        image->data()[pix * 3 + ch] = acc[ch] + opts.background[ch] * t;
    }
  return image;
}

}  // namespace photosplat
