#pragma once

#include <string>
#include <vector>

#include "photosplat/io.hpp"
#include "photosplat/synth.hpp"

namespace photosplat {

// PSNR with a distinguished zero-error marker; `db` is meaningless when
// `infinite` is set.
struct Psnr {
  bool infinite = false;
  double db = 0.0;
};

// 10*log10(1/MSE) against a peak of 1.0.
Psnr psnr(const Image& a, const Image& b);

// Mean SSIM, sharing the window and constants with the training loss.
double ssim(const Image& a, const Image& b);

// Scale-aligned mean absolute error: s* = <rec,gt>/<rec,rec> minimizes the
// L2 gap, then MAE of s*rec vs gt. Resolves the global radiance/attenuation
// gauge.
double attenuation_error(const Image& recovered, const Image& gt);

// Mean distance (px) from each ground-truth blob center to the nearest
// local maximum of the channel-mean emission map that clears half the map's
// global peak. Blobs with no qualifying maximum cost the image diagonal.
double emission_localization(const Image& emission,
                             const std::vector<ContaminantBlob>& blobs);

struct ViewEval {
  std::size_t view_index = 0;
  Psnr psnr_distorted;
  double ssim_distorted = 0.0;
  bool has_clean = false;
  Psnr psnr_clean;
  double ssim_clean = 0.0;
};

struct EvalReport {
  std::vector<ViewEval> views;
  Psnr psnr_distorted_mean;
  double ssim_distorted_mean = 0.0;
  bool has_clean = false;
  Psnr psnr_clean_mean;
  double ssim_clean_mean = 0.0;
  bool has_maps = false;
  double attenuation_mae = 0.0;
  bool has_localization = false;
  double emission_localization_px = 0.0;

  // Recomputes the mean fields from the per-view entries. A single infinite
  // per-view PSNR makes the corresponding mean infinite.
  void finalize_means();

  std::string to_json() const;
  static EvalReport from_json(const std::string& text);
};

}  // namespace photosplat
