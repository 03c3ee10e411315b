#include "photosplat/ops.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <utility>

namespace photosplat {

namespace {

class LambdaNode final : public TapeNode {
 public:
  explicit LambdaNode(std::function<void()> fn) : fn_(std::move(fn)) {}
  void backward() override { fn_(); }

 private:
  std::function<void()> fn_;
};

// Records fn on the active tape when out participates in differentiation.
void maybe_record(const TensorPtr& out, std::function<void()> fn) {
  if (out->requires_grad() && Tape::active())
    Tape::active()->record(std::make_unique<LambdaNode>(std::move(fn)));
}

void check_same_shape(const char* op, const TensorPtr& a, const TensorPtr& b) {
  require(Tensor::same_shape(*a, *b), op, ": shape mismatch ", a->shape_str(),
          " vs ", b->shape_str());
}

TensorPtr make_out(std::vector<std::size_t> shape, bool requires_grad) {
  return Tensor::create(std::move(shape), requires_grad);
}

}  // namespace

double sigmoid_scalar(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_scalar(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

TensorPtr add(const TensorPtr& a, const TensorPtr& b) {
  check_same_shape("add", a, b);
  auto out = make_out(a->shape(), a->requires_grad() || b->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data()[i] = a->at(i) + b->at(i);
  maybe_record(out, [a, b, out] {
    for (std::size_t i = 0; i < out->size(); ++i) {
      const double g = out->grad()[i];
      a->grad()[i] += g;
      b->grad()[i] += g;
    }
  });
  return out;
}

TensorPtr sub(const TensorPtr& a, const TensorPtr& b) {
  check_same_shape("sub", a, b);
  auto out = make_out(a->shape(), a->requires_grad() || b->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data()[i] = a->at(i) - b->at(i);
  maybe_record(out, [a, b, out] {
    for (std::size_t i = 0; i < out->size(); ++i) {
      const double g = out->grad()[i];
      a->grad()[i] += g;
      b->grad()[i] -= g;
    }
  });
  return out;
}

TensorPtr mul(const TensorPtr& a, const TensorPtr& b) {
  check_same_shape("mul", a, b);
  auto out = make_out(a->shape(), a->requires_grad() || b->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data()[i] = a->at(i) * b->at(i);
  maybe_record(out, [a, b, out] {
    for (std::size_t i = 0; i < out->size(); ++i) {
      const double g = out->grad()[i];
      a->grad()[i] += g * b->at(i);
      b->grad()[i] += g * a->at(i);
    }
  });
  return out;
}

TensorPtr div(const TensorPtr& a, const TensorPtr& b) {
  check_same_shape("div", a, b);
  auto out = make_out(a->shape(), a->requires_grad() || b->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data()[i] = a->at(i) / b->at(i);
  maybe_record(out, [a, b, out] {
    for (std::size_t i = 0; i < out->size(); ++i) {
      const double g = out->grad()[i];
      const double bi = b->at(i);
      a->grad()[i] += g / bi;
      b->grad()[i] -= g * a->at(i) / (bi * bi);
    }
  });
  return out;
}

TensorPtr add_scalar(const TensorPtr& a, double s) {
  auto out = make_out(a->shape(), a->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i) out->data()[i] = a->at(i) + s;
  maybe_record(out, [a, out] {
    for (std::size_t i = 0; i < out->size(); ++i)
      a->grad()[i] += out->grad()[i];
  });
  return out;
}

TensorPtr mul_scalar(const TensorPtr& a, double s) {
  auto out = make_out(a->shape(), a->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i) out->data()[i] = a->at(i) * s;
  maybe_record(out, [a, out, s] {
    for (std::size_t i = 0; i < out->size(); ++i)
      a->grad()[i] += out->grad()[i] * s;
  });
  return out;
}

TensorPtr matmul(const TensorPtr& a, const TensorPtr& b) {
  require(a->rank() == 2 && b->rank() == 2, "matmul: need 2D operands, got ",
          a->shape_str(), " and ", b->shape_str());
  const std::size_t m = a->dim(0), k = a->dim(1), n = b->dim(1);
  require(b->dim(0) == k, "matmul: inner dims differ, ", a->shape_str(),
          " vs ", b->shape_str());
  auto out = make_out({m, n}, a->requires_grad() || b->requires_grad());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t)
        acc += a->at(i * k + t) * b->at(t * n + j);
      out->data()[i * n + j] = acc;
    }
  maybe_record(out, [a, b, out, m, k, n] {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double g = out->grad()[i * n + j];
        if (g == 0.0) continue;
        for (std::size_t t = 0; t < k; ++t) {
          a->grad()[i * k + t] += g * b->at(t * n + j);
          b->grad()[t * n + j] += g * a->at(i * k + t);
        }
      }
  });
  return out;
}

TensorPtr add_rowvec(const TensorPtr& a, const TensorPtr& v) {
  require(a->rank() == 2, "add_rowvec: matrix must be 2D, got ",
          a->shape_str());
  require(v->size() == a->dim(1), "add_rowvec: vector length ", v->size(),
          " does not match columns of ", a->shape_str());
  const std::size_t m = a->dim(0), n = a->dim(1);
  auto out = make_out(a->shape(), a->requires_grad() || v->requires_grad());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out->data()[i * n + j] = a->at(i * n + j) + v->at(j);
  maybe_record(out, [a, v, out, m, n] {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        const double g = out->grad()[i * n + j];
        a->grad()[i * n + j] += g;
        v->grad()[j] += g;
      }
  });
  return out;
}

TensorPtr sum(const TensorPtr& a) {
  auto out = make_out({1}, a->requires_grad());
  double acc = 0.0;
  for (std::size_t i = 0; i < a->size(); ++i) acc += a->at(i);
  out->data()[0] = acc;
  maybe_record(out, [a, out] {
    const double g = out->grad()[0];
    for (std::size_t i = 0; i < a->size(); ++i) a->grad()[i] += g;
  });
  return out;
}

TensorPtr mean(const TensorPtr& a) {
  require(a->size() > 0, "mean: empty tensor");
  auto out = make_out({1}, a->requires_grad());
  double acc = 0.0;
  for (std::size_t i = 0; i < a->size(); ++i) acc += a->at(i);
  const double inv_n = 1.0 / static_cast<double>(a->size());
  out->data()[0] = acc * inv_n;
  maybe_record(out, [a, out, inv_n] {
    const double g = out->grad()[0] * inv_n;
    for (std::size_t i = 0; i < a->size(); ++i) a->grad()[i] += g;
  });
  return out;
}

TensorPtr exp(const TensorPtr& a) {
  auto out = make_out(a->shape(), a->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data()[i] = std::exp(a->at(i));
  maybe_record(out, [a, out] {
    for (std::size_t i = 0; i < out->size(); ++i)
      a->grad()[i] += out->grad()[i] * out->at(i);
  });
  return out;
}

TensorPtr sigmoid(const TensorPtr& a) {
  auto out = make_out(a->shape(), a->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data()[i] = sigmoid_scalar(a->at(i));
  maybe_record(out, [a, out] {
    for (std::size_t i = 0; i < out->size(); ++i) {
      const double y = out->at(i);
      a->grad()[i] += out->grad()[i] * y * (1.0 - y);
    }
  });
  return out;
}

TensorPtr softplus(const TensorPtr& a) {
  auto out = make_out(a->shape(), a->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data()[i] = softplus_scalar(a->at(i));
  maybe_record(out, [a, out] {
    for (std::size_t i = 0; i < out->size(); ++i)
      a->grad()[i] += out->grad()[i] * sigmoid_scalar(a->at(i));
  });
  return out;
}

TensorPtr clamp(const TensorPtr& a, double lo, double hi) {
  require(lo <= hi, "clamp: lo ", lo, " > hi ", hi);
  auto out = make_out(a->shape(), a->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data()[i] = std::min(hi, std::max(lo, a->at(i)));
  maybe_record(out, [a, out, lo, hi] {
    for (std::size_t i = 0; i < out->size(); ++i) {
      const double x = a->at(i);
      if (x >= lo && x <= hi) a->grad()[i] += out->grad()[i];
    }
  });
  return out;
}

TensorPtr abs(const TensorPtr& a) {
  auto out = make_out(a->shape(), a->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data()[i] = std::abs(a->at(i));
  maybe_record(out, [a, out] {
    for (std::size_t i = 0; i < out->size(); ++i) {
      const double x = a->at(i);
      const double s = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
      a->grad()[i] += out->grad()[i] * s;
    }
  });
  return out;
}

TensorPtr sin(const TensorPtr& a) {
  auto out = make_out(a->shape(), a->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data()[i] = std::sin(a->at(i));
  maybe_record(out, [a, out] {
    for (std::size_t i = 0; i < out->size(); ++i)
      a->grad()[i] += out->grad()[i] * std::cos(a->at(i));
  });
  return out;
}

TensorPtr cos(const TensorPtr& a) {
  auto out = make_out(a->shape(), a->requires_grad());
  for (std::size_t i = 0; i < a->size(); ++i)
    out->data()[i] = std::cos(a->at(i));
  maybe_record(out, [a, out] {
    for (std::size_t i = 0; i < out->size(); ++i)
      a->grad()[i] -= out->grad()[i] * std::sin(a->at(i));
  });
  return out;
}

TensorPtr concat_cols(const TensorPtr& a, const TensorPtr& b) {
  require(a->rank() == 2 && b->rank() == 2 && a->dim(0) == b->dim(0),
          "concat_cols: incompatible shapes ", a->shape_str(), " and ",
          b->shape_str());
  const std::size_t m = a->dim(0), na = a->dim(1), nb = b->dim(1);
  auto out = make_out({m, na + nb}, a->requires_grad() || b->requires_grad());
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < na; ++j)
      out->data()[i * (na + nb) + j] = a->at(i * na + j);
    for (std::size_t j = 0; j < nb; ++j)
      out->data()[i * (na + nb) + na + j] = b->at(i * nb + j);
  }
  maybe_record(out, [a, b, out, m, na, nb] {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < na; ++j)
        a->grad()[i * na + j] += out->grad()[i * (na + nb) + j];
      for (std::size_t j = 0; j < nb; ++j)
        b->grad()[i * nb + j] += out->grad()[i * (na + nb) + na + j];
    }
  });
  return out;
}

TensorPtr slice_cols(const TensorPtr& a, std::size_t col_begin,
                     std::size_t col_end) {
  require(a->rank() == 2, "slice_cols: need 2D tensor, got ", a->shape_str());
  require(col_begin < col_end && col_end <= a->dim(1),
          "slice_cols: bad range [", col_begin, ",", col_end, ") for ",
          a->shape_str());
  const std::size_t m = a->dim(0), n = a->dim(1), w = col_end - col_begin;
  auto out = make_out({m, w}, a->requires_grad());
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j)
      out->data()[i * w + j] = a->at(i * n + col_begin + j);
  maybe_record(out, [a, out, m, n, w, col_begin] {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j)
        a->grad()[i * n + col_begin + j] += out->grad()[i * w + j];
  });
  return out;
}

TensorPtr reshape(const TensorPtr& a, std::vector<std::size_t> new_shape) {
  auto out = make_out(std::move(new_shape), a->requires_grad());
  require(out->size() == a->size(), "reshape: cannot view ", a->shape_str(),
          " as ", out->shape_str());
  out->values() = a->values();
  maybe_record(out, [a, out] {
    for (std::size_t i = 0; i < out->size(); ++i)
      a->grad()[i] += out->grad()[i];
  });
  return out;
}

TensorPtr expand_channels(const TensorPtr& a, std::size_t channels) {
  require(a->rank() == 2, "expand_channels: need [H,W], got ",
          a->shape_str());
  require(channels > 0, "expand_channels: zero channels");
  const std::size_t h = a->dim(0), w = a->dim(1);
  auto out = make_out({h, w, channels}, a->requires_grad());
  for (std::size_t p = 0; p < h * w; ++p)
    for (std::size_t c = 0; c < channels; ++c)
      out->data()[p * channels + c] = a->at(p);
  maybe_record(out, [a, out, h, w, channels] {
    for (std::size_t p = 0; p < h * w; ++p) {
      double acc = 0.0;
      for (std::size_t c = 0; c < channels; ++c)
        acc += out->grad()[p * channels + c];
      a->grad()[p] += acc;
    }
  });
  return out;
}

const std::vector<std::array<int, 2>>& disk_offsets(double radius_px) {
  require(std::isfinite(radius_px) && radius_px >= 0.0,
          "disk_offsets: bad radius ", radius_px);
  static std::map<double, std::vector<std::array<int, 2>>> cache;
  auto it = cache.find(radius_px);
  if (it != cache.end()) return it->second;
  std::vector<std::array<int, 2>> offsets;
  const int reach = static_cast<int>(std::floor(radius_px));
  const double r2 = radius_px * radius_px;
  for (int dy = -reach; dy <= reach; ++dy)
    for (int dx = -reach; dx <= reach; ++dx)
      if (static_cast<double>(dy) * dy + static_cast<double>(dx) * dx <= r2)
        offsets.push_back({dy, dx});
  return cache.emplace(radius_px, std::move(offsets)).first->second;
}

TensorPtr disk_conv2d(const TensorPtr& a, double radius_px) {
  require(a->rank() == 2 || a->rank() == 3, "disk_conv2d: need [H,W] or ",
          "[H,W,C], got ", a->shape_str());
  const std::size_t h = a->dim(0), w = a->dim(1);
  const std::size_t c = a->rank() == 3 ? a->dim(2) : 1;
  const auto& offsets = disk_offsets(radius_px);
  auto out = make_out(a->shape(), a->requires_grad());
  const int ih = static_cast<int>(h), iw = static_cast<int>(w);
  std::vector<double> acc(c);
  for (int y = 0; y < ih; ++y)
    for (int x = 0; x < iw; ++x) {
      std::fill(acc.begin(), acc.end(), 0.0);
      std::size_t count = 0;
      for (const auto& o : offsets) {
        const int yy = y + o[0], xx = x + o[1];
        if (yy < 0 || yy >= ih || xx < 0 || xx >= iw) continue;
        ++count;
        const double* src =
            a->data() + (static_cast<std::size_t>(yy) * w + xx) * c;
        for (std::size_t ch = 0; ch < c; ++ch) acc[ch] += src[ch];
      }
      const double inv = 1.0 / static_cast<double>(count);
      double* dst = out->data() + (static_cast<std::size_t>(y) * w + x) * c;
      for (std::size_t ch = 0; ch < c; ++ch) dst[ch] = acc[ch] * inv;
    }
  maybe_record(out, [a, out, radius_px, h, w, c] {
    const auto& offs = disk_offsets(radius_px);
    const int ih = static_cast<int>(h), iw = static_cast<int>(w);
    for (int y = 0; y < ih; ++y)
      for (int x = 0; x < iw; ++x) {
        std::size_t count = 0;
        for (const auto& o : offs) {
          const int yy = y + o[0], xx = x + o[1];
          if (yy >= 0 && yy < ih && xx >= 0 && xx < iw) ++count;
        }
        const double inv = 1.0 / static_cast<double>(count);
        const double* g =
            out->grad() + (static_cast<std::size_t>(y) * w + x) * c;
        for (const auto& o : offs) {
          const int yy = y + o[0], xx = x + o[1];
          if (yy < 0 || yy >= ih || xx < 0 || xx >= iw) continue;
          double* dst =
              a->grad() + (static_cast<std::size_t>(yy) * w + xx) * c;
          for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += g[ch] * inv;
        }
      }
  });
  return out;
}

TensorPtr sep_conv2d_valid(const TensorPtr& a, const std::vector<double>& k) {
  require(a->rank() == 3, "sep_conv2d_valid: need [H,W,C], got ",
          a->shape_str());
  const std::size_t h = a->dim(0), w = a->dim(1), c = a->dim(2);
  const std::size_t kn = k.size();
  require(kn >= 1 && h >= kn && w >= kn, "sep_conv2d_valid: kernel size ", kn,
          " too large for ", a->shape_str());
  const std::size_t oh = h - kn + 1, ow = w - kn + 1;

  // Rows first into a temporary, then columns.
  std::vector<double> tmp(h * ow * c, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x)
      for (std::size_t ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (std::size_t i = 0; i < kn; ++i)
          acc += a->at((y * w + x + i) * c + ch) * k[i];
        tmp[(y * ow + x) * c + ch] = acc;
      }
  auto out = make_out({oh, ow, c}, a->requires_grad());
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x)
      for (std::size_t ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (std::size_t j = 0; j < kn; ++j)
          acc += tmp[((y + j) * ow + x) * c + ch] * k[j];
        out->data()[(y * ow + x) * c + ch] = acc;
      }
  maybe_record(out, [a, out, k, w, c, oh, ow] {
    const std::size_t kn = k.size();
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x)
        for (std::size_t ch = 0; ch < c; ++ch) {
          const double g = out->grad()[(y * ow + x) * c + ch];
          if (g == 0.0) continue;
          for (std::size_t j = 0; j < kn; ++j)
            for (std::size_t i = 0; i < kn; ++i)
              a->grad()[((y + j) * w + x + i) * c + ch] += g * k[j] * k[i];
        }
  });
  return out;
}

}  // namespace photosplat
