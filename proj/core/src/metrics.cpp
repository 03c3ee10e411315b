#include "photosplat/metrics.hpp"

#include <cmath>

#include <json.hpp>

#include "photosplat/common.hpp"
#include "photosplat/loss.hpp"

namespace photosplat {

using ordered_json = nlohmann::ordered_json;

namespace {

void require_same_dims(const Image& a, const Image& b, const char* who) {
  require(a.width == b.width && a.height == b.height &&
              a.channels == b.channels,
          who, ": image size mismatch (", a.width, "x", a.height, "x",
          a.channels, " vs ", b.width, "x", b.height, "x", b.channels, ")");
}

ordered_json encode_psnr(const Psnr& p) {
  if (p.infinite) return "inf";
  return p.db;
}

Psnr decode_psnr(const ordered_json& j) {
  Psnr p;
  if (j.is_string()) {
    require(j.get<std::string>() == "inf", "eval report: bad psnr value");
    p.infinite = true;
  } else {
    p.db = j.get<double>();
  }
  return p;
}

}  // namespace

Psnr psnr(const Image& a, const Image& b) {
  require_same_dims(a, b, "psnr");
  require(!a.pixels.empty(), "psnr: empty images");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = a.pixels[i] - b.pixels[i];
    acc += d * d;
  }
  const double mse = acc / static_cast<double>(a.pixels.size());
  if (mse == 0.0) return {true, 0.0};
  return {false, -10.0 * std::log10(mse)};
}

double ssim(const Image& a, const Image& b) {
  require_same_dims(a, b, "ssim");
  return 1.0 - 2.0 * dssim(image_to_tensor(a), image_to_tensor(b))->at(0);
}

double attenuation_error(const Image& recovered, const Image& gt) {
  require_same_dims(recovered, gt, "attenuation_error");
  double gt_max = 0.0;
  for (double p : gt.pixels) gt_max = std::max(gt_max, p);
  require(gt_max > 0.0, "attenuation_error: ground truth is all zero");
  double dot = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < recovered.pixels.size(); ++i) {
    dot += recovered.pixels[i] * gt.pixels[i];
    norm += recovered.pixels[i] * recovered.pixels[i];
  }
  require(norm > 0.0, "attenuation_error: recovered map is identically zero");
  const double s = dot / norm;
  double acc = 0.0;
  for (std::size_t i = 0; i < recovered.pixels.size(); ++i)
    acc += std::fabs(s * recovered.pixels[i] - gt.pixels[i]);
  return acc / static_cast<double>(recovered.pixels.size());
}

double emission_localization(const Image& emission,
                             const std::vector<ContaminantBlob>& blobs) {
  require(!blobs.empty(), "emission_localization: no ground-truth blobs");
  const std::size_t w = emission.width, h = emission.height;
  require(w >= 2 && h >= 2, "emission_localization: degenerate map");

  std::vector<double> mean_map(w * h, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::size_t c = 0; c < emission.channels; ++c)
        acc += emission.at(y, x, c);
      mean_map[y * w + x] = acc / static_cast<double>(emission.channels);
    }
  double global_max = 0.0;
  for (double v : mean_map) global_max = std::max(global_max, v);

  std::vector<std::pair<double, double>> peaks;
  if (global_max > 0.0) {
    const double threshold = 0.5 * global_max;
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const double v = mean_map[y * w + x];
        if (v < threshold) continue;
        bool is_peak = true;
        for (int dy = -1; dy <= 1 && is_peak; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            const int ny = static_cast<int>(y) + dy;
            const int nx = static_cast<int>(x) + dx;
            if (ny < 0 || ny >= static_cast<int>(h) || nx < 0 ||
                nx >= static_cast<int>(w))
              continue;
            if (mean_map[static_cast<std::size_t>(ny) * w + nx] > v) {
              is_peak = false;
              break;
            }
          }
        if (is_peak)
          peaks.emplace_back(static_cast<double>(x), static_cast<double>(y));
      }
  }

  const double diagonal = std::hypot(static_cast<double>(w - 1),
                                     static_cast<double>(h - 1));
  double total = 0.0;
  for (const auto& blob : blobs) {
    const double bx = (blob.center[0] + 1.0) * static_cast<double>(w - 1) / 2.0;
    const double by = (blob.center[1] + 1.0) * static_cast<double>(h - 1) / 2.0;
    double best = diagonal;
    for (const auto& [px, py] : peaks)
      best = std::min(best, std::hypot(px - bx, py - by));
    total += best;
  }
  return total / static_cast<double>(blobs.size());
}

void EvalReport::finalize_means() {
  psnr_distorted_mean = {};
  ssim_distorted_mean = 0.0;
  psnr_clean_mean = {};
  ssim_clean_mean = 0.0;
  if (views.empty()) return;
  const double n = static_cast<double>(views.size());
  for (const auto& v : views) {
    if (v.psnr_distorted.infinite)
      psnr_distorted_mean.infinite = true;
    else
      psnr_distorted_mean.db += v.psnr_distorted.db / n;
    ssim_distorted_mean += v.ssim_distorted / n;
    if (has_clean) {
      if (v.psnr_clean.infinite)
        psnr_clean_mean.infinite = true;
      else
        psnr_clean_mean.db += v.psnr_clean.db / n;
      ssim_clean_mean += v.ssim_clean / n;
    }
  }
  if (psnr_distorted_mean.infinite) psnr_distorted_mean.db = 0.0;
  if (psnr_clean_mean.infinite) psnr_clean_mean.db = 0.0;
}

std::string EvalReport::to_json() const {
  ordered_json j;
  j["views"] = ordered_json::array();
  for (const auto& v : views) {
    ordered_json e;
    e["view_index"] = v.view_index;
    e["psnr_distorted"] = encode_psnr(v.psnr_distorted);
    e["ssim_distorted"] = v.ssim_distorted;
    if (v.has_clean) {
      e["psnr_clean"] = encode_psnr(v.psnr_clean);
      e["ssim_clean"] = v.ssim_clean;
    }
    j["views"].push_back(std::move(e));
  }
  ordered_json m;
  m["psnr_distorted"] = encode_psnr(psnr_distorted_mean);
  m["ssim_distorted"] = ssim_distorted_mean;
  if (has_clean) {
    m["psnr_clean"] = encode_psnr(psnr_clean_mean);
    m["ssim_clean"] = ssim_clean_mean;
  }
  j["mean"] = std::move(m);
  if (has_maps) j["attenuation_mae"] = attenuation_mae;
  if (has_localization)
    j["emission_localization_px"] = emission_localization_px;
  return j.dump(2) + "\n";
}

EvalReport EvalReport::from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail("eval report: malformed json: ", e.what());
  }
  EvalReport report;
  try {
    for (const auto& e : j.at("views")) {
      ViewEval v;
      v.view_index = e.at("view_index").get<std::size_t>();
      v.psnr_distorted = decode_psnr(e.at("psnr_distorted"));
      v.ssim_distorted = e.at("ssim_distorted").get<double>();
      if (e.contains("psnr_clean")) {
        v.has_clean = true;
        v.psnr_clean = decode_psnr(e.at("psnr_clean"));
        v.ssim_clean = e.at("ssim_clean").get<double>();
      }
      report.views.push_back(v);
    }
    const auto& m = j.at("mean");
    report.psnr_distorted_mean = decode_psnr(m.at("psnr_distorted"));
    report.ssim_distorted_mean = m.at("ssim_distorted").get<double>();
    if (m.contains("psnr_clean")) {
      report.has_clean = true;
      report.psnr_clean_mean = decode_psnr(m.at("psnr_clean"));
      report.ssim_clean_mean = m.at("ssim_clean").get<double>();
    }
    if (j.contains("attenuation_mae")) {
      report.has_maps = true;
      report.attenuation_mae = j.at("attenuation_mae").get<double>();
    }
    if (j.contains("emission_localization_px")) {
      report.has_localization = true;
      report.emission_localization_px =
          j.at("emission_localization_px").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    fail("eval report: malformed json: ", e.what());
  }
  return report;
}

}  // namespace photosplat
