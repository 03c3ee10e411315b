#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "photosplat/tensor.hpp"

namespace photosplat {

std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& text);
std::string sha256_hex_file(const std::string& path);

// Linear-radiance raster, row-major [H][W][C], values in [0,1].
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t channels = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t w, std::size_t h, std::size_t c)
      : width(w), height(h), channels(c), pixels(w * h * c, 0.0) {}
  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return pixels[(y * width + x) * channels + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * channels + c];
  }
};

// 16-bit PNG, channels 1 (gray) or 3 (RGB). Values clamped to [0,1] and
// quantized to round(v * 65535).
void write_png16(const std::string& path, const Image& img);
Image read_png16(const std::string& path);

// [H,W] for single-channel images, [H,W,C] otherwise; values copied.
TensorPtr image_to_tensor(const Image& img);
Image tensor_to_image(const Tensor& t);

// Named blocks of raw doubles plus an iteration counter; round-trips
// bit-exactly. Used for scene and camera checkpoints.
struct Checkpoint {
  std::uint64_t iteration = 0;
  std::vector<std::pair<std::string, std::vector<double>>> blocks;

  const std::vector<double>& block(const std::string& name) const;
  double scalar(const std::string& name) const;
  void add(const std::string& name, std::vector<double> values);
  void add_scalar(const std::string& name, double value);
  bool has(const std::string& name) const;
};

void write_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace photosplat
