#include "seeds/image.hpp"

#include <jpeglib.h>
#include <png.h>
#include <unistd.h>

#include <atomic>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <thread>

#include "seeds/error.hpp"

namespace seeds {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  require(width > 0 && height > 0, ErrorCode::PreconditionViolated, "image dimensions must be positive");
  pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

std::size_t Image::offset(int x, int y) const {
  require(x >= 0 && y >= 0 && x < width_ && y < height_, ErrorCode::IndexOutOfRange,
          "pixel (" + std::to_string(x) + ", " + std::to_string(y) + ") outside image");
  return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)) * 3;
}

Rgb Image::at(int x, int y) const {
  const std::size_t o = offset(x, y);
  return {pixels_[o], pixels_[o + 1], pixels_[o + 2]};
}

void Image::set(int x, int y, Rgb c) {
  const std::size_t o = offset(x, y);
  pixels_[o] = c.r;
  pixels_[o + 1] = c.g;
  pixels_[o + 2] = c.b;
}

void Image::blit(const Image& tile, int x0, int y0) {
  require(x0 >= 0 && y0 >= 0 && x0 + tile.width() <= width_ && y0 + tile.height() <= height_,
          ErrorCode::PreconditionViolated, "tile does not fit");
  const std::size_t row_bytes = static_cast<std::size_t>(tile.width()) * 3;
  for (int y = 0; y < tile.height(); ++y) {
    std::memcpy(pixels_.data() + offset(x0, y0 + y), tile.pixels_.data() + static_cast<std::size_t>(y) * row_bytes,
                row_bytes);
  }
}

// ---------------------------------------------------------------------------
// PNG

namespace {

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

struct PngReadCursor {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_from_span(png_structp png, png_bytep data, png_size_t length) {
  auto* cur = static_cast<PngReadCursor*>(png_get_io_ptr(png));
  if (cur->pos + length > cur->bytes.size()) png_error(png, "truncated PNG");
  std::memcpy(data, cur->bytes.data() + cur->pos, length);
  cur->pos += length;
}

// The setjmp frames below own no C++ objects; buffers live in the caller so
// a longjmp never skips a destructor or clobbers a local.
bool png_decode_into(png_structp png, png_infop info, PngReadCursor& cursor, std::vector<std::uint8_t>& pixels,
                     std::vector<png_bytep>& rows, png_uint_32& width, png_uint_32& height) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_read_fn(png, &cursor, png_read_from_span);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  pixels.resize(static_cast<std::size_t>(width) * height * 3);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * width * 3;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  return true;
}

Image decode_png(std::span<const std::uint8_t> bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, ErrorCode::CorruptImage, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  PngReadCursor cursor{bytes, 0};
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0, height = 0;
  const bool ok = info != nullptr && png_decode_into(png, info, cursor, pixels, rows, width, height);
  png_destroy_read_struct(&png, &info, nullptr);
  require(ok && width > 0 && height > 0, ErrorCode::CorruptImage, "invalid PNG data");

  Image image(static_cast<int>(width), static_cast<int>(height));
  std::memcpy(image.pixels().data(), pixels.data(), pixels.size());
  return image;
}

bool png_encode_into(png_structp png, png_infop info, const Image& image, std::vector<std::uint8_t>& out,
                     std::vector<png_bytep>& rows) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_filter(png, PNG_FILTER_TYPE_BASE, PNG_FILTER_NONE);
  png_set_compression_level(png, 9);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  return true;
}

// ---------------------------------------------------------------------------
// JPEG (decode only)

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  std::longjmp(err->jump, 1);
}

void jpeg_silence(j_common_ptr, int) {}

bool jpeg_decode_into(jpeg_decompress_struct& cinfo, JpegError& err, std::span<const std::uint8_t> bytes,
                      std::vector<std::uint8_t>& pixels, int& width, int& height) {
  if (setjmp(err.jump)) return false;
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  width = static_cast<int>(cinfo.output_width);
  height = static_cast<int>(cinfo.output_height);
  pixels.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * static_cast<std::size_t>(width) * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  return true;
}

Image decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegError err{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  err.mgr.emit_message = jpeg_silence;
  std::vector<std::uint8_t> pixels;
  int width = 0, height = 0;
  const bool ok = jpeg_decode_into(cinfo, err, bytes, pixels, width, height);
  jpeg_destroy_decompress(&cinfo);
  require(ok && width > 0 && height > 0, ErrorCode::CorruptImage, "invalid JPEG data");

  Image image(width, height);
  std::memcpy(image.pixels().data(), pixels.data(), pixels.size());
  return image;
}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
  require(!image.empty(), ErrorCode::PreconditionViolated, "cannot encode an empty image");
  std::vector<std::uint8_t> out;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  require(png != nullptr, ErrorCode::Io, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  auto* base = const_cast<std::uint8_t*>(image.pixels().data());
  for (std::size_t y = 0; y < rows.size(); ++y) rows[y] = base + y * static_cast<std::size_t>(image.width()) * 3;
  const bool ok = info != nullptr && png_encode_into(png, info, image, out, rows);
  png_destroy_write_struct(&png, &info);
  require(ok, ErrorCode::Io, "PNG encoding failed");
  return out;
}

ImageFormat sniff_format(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kPng[] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= sizeof kPng && std::memcmp(bytes.data(), kPng, sizeof kPng) == 0) return ImageFormat::png;
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) return ImageFormat::jpeg;
  return ImageFormat::unknown;
}

Image decode_image(std::span<const std::uint8_t> bytes) {
  switch (sniff_format(bytes)) {
    case ImageFormat::png: return decode_png(bytes);
    case ImageFormat::jpeg: return decode_jpeg(bytes);
    case ImageFormat::unknown: break;
  }
  fail(ErrorCode::CorruptImage, bytes.empty() ? "empty image file" : "unrecognised image format");
}

Image resize_bilinear(const Image& src, int width, int height) {
  require(!src.empty(), ErrorCode::PreconditionViolated, "cannot resize an empty image");
  Image out(width, height);
  kernels::parallel::resize_bilinear(src.view(), out.span());
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  static std::atomic<std::uint64_t> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCode::StoreUnwritable, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(static_cast<bool>(out), ErrorCode::StoreUnwritable, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace seeds
