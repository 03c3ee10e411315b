#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>

#include "photosplat/common.hpp"
#include "photosplat/io.hpp"

namespace photosplat {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FileHandle = std::unique_ptr<std::FILE, FileCloser>;

void png_error_to_exception(png_structp png, png_const_charp msg) {
  // Rethrown as photosplat::Error from the setjmp landing site; libpng
  // requires the longjmp to unwind its own frames first.
  (void)msg;
  longjmp(png_jmpbuf(png), 1);
}

std::uint16_t quantize16(double v) {
  const double c = std::min(1.0, std::max(0.0, v));
  return static_cast<std::uint16_t>(std::lround(c * 65535.0));
}

}  // namespace

void write_png16(const std::string& path, const Image& img) {
  require(img.channels == 1 || img.channels == 3,
          "write_png16: channels must be 1 or 3, got ", img.channels);
  require(img.width > 0 && img.height > 0, "write_png16: empty image");
  require(img.pixels.size() == img.width * img.height * img.channels,
          "write_png16: pixel buffer size mismatch for ", path);

  FileHandle file(std::fopen(path.c_str(), "wb"));
  require(file != nullptr, "cannot open for writing: ", path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            png_error_to_exception, nullptr);
  require(png != nullptr, "png writer allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail("png info allocation failed");
  }
  std::vector<std::uint16_t> row(img.width * img.channels);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail("png write failed: ", path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 16,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_set_swap(png);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t i = 0; i < row.size(); ++i)
      row[i] = quantize16(img.pixels[y * row.size() + i]);
    png_write_row(png, reinterpret_cast<png_bytep>(row.data()));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png16(const std::string& path) {
  FileHandle file(std::fopen(path.c_str(), "rb"));
  require(file != nullptr, "cannot open image: ", path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           png_error_to_exception, nullptr);
  require(png != nullptr, "png reader allocation failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail("png info allocation failed");
  }
  Image img;
  std::vector<std::uint16_t> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("corrupt or truncated image: ", path);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_RGB) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("unsupported png color type in ", path);
  }
  if (depth != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("expected a 16-bit png: ", path);
  }
  png_set_swap(png);
  png_read_update_info(png, info);
  img.width = w;
  img.height = h;
  img.channels = color == PNG_COLOR_TYPE_GRAY ? 1 : 3;
  img.pixels.assign(img.width * img.height * img.channels, 0.0);
  row.resize(img.width * img.channels);
  for (std::size_t y = 0; y < img.height; ++y) {
    png_read_row(png, reinterpret_cast<png_bytep>(row.data()), nullptr);
    for (std::size_t i = 0; i < row.size(); ++i)
      img.pixels[y * row.size() + i] = row[i] / 65535.0;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

TensorPtr image_to_tensor(const Image& img) {
  require(img.channels == 1 || img.channels == 3,
          "image_to_tensor: unsupported channel count ", img.channels);
  std::vector<std::size_t> shape = img.channels == 1
                                       ? std::vector<std::size_t>{img.height,
                                                                  img.width}
                                       : std::vector<std::size_t>{
                                             img.height, img.width,
                                             img.channels};
  return Tensor::from_values(std::move(shape), img.pixels);
}

Image tensor_to_image(const Tensor& t) {
  require(t.rank() == 2 || t.rank() == 3, "tensor_to_image: expected [H,W] ",
          "or [H,W,C], got ", t.shape_str());
  const std::size_t c = t.rank() == 2 ? 1 : t.dim(2);
  require(c == 1 || c == 3, "tensor_to_image: unsupported channel count ", c);
  Image img(t.dim(1), t.dim(0), c);
  img.pixels = t.values();
  return img;
}

}  // namespace photosplat
