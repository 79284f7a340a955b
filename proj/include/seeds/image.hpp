#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "seeds/kernels.hpp"

namespace seeds {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kWhite{255, 255, 255};

// 8-bit RGB raster, row-major, interleaved.
class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return pixels_.empty(); }

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  kernels::RgbView view() const noexcept { return {pixels_, width_, height_}; }
  kernels::RgbSpan span() noexcept { return {pixels_, width_, height_}; }

  // Copies `tile` with its top-left corner at (x0, y0); must fit entirely.
  void blit(const Image& tile, int x0, int y0);

  bool operator==(const Image&) const = default;

 private:
  std::size_t offset(int x, int y) const;

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Lossless PNG, 8-bit RGB, no interlace, filter "none", zlib level 9. Equal
// images always encode to equal bytes.
std::vector<std::uint8_t> encode_png(const Image& image);

// Accepts PNG or JPEG; anything else (including 0 bytes) is CorruptImage.
Image decode_image(std::span<const std::uint8_t> bytes);

enum class ImageFormat { png, jpeg, unknown };
ImageFormat sniff_format(std::span<const std::uint8_t> bytes);

Image resize_bilinear(const Image& src, int width, int height);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace seeds
