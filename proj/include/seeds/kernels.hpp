#pragma once

// Data-parallel inner loops. Each kernel has a serial reference under
// seeds::kernels::serial and an OpenMP version under seeds::kernels::parallel
// with the same signature. The two must agree bit-for-bit: the parallel
// versions only split independent output rows/pixels across threads and
// never reorder a reduction.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "seeds/tensor.hpp"

namespace seeds::kernels {

// Interleaved 8-bit RGB raster view.
struct RgbView {
  std::span<const std::uint8_t> pixels;
  int width = 0;
  int height = 0;
};

struct RgbSpan {
  std::span<std::uint8_t> pixels;
  int width = 0;
  int height = 0;
};

// Fixed-point precision of bilinear weights (1 << kResizeFracBits == 1.0).
inline constexpr int kResizeFracBits = 11;

namespace serial {

// y = w * x + b
void affine(const Matrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y);

// Row-wise relu(w_enc * x_i + b_enc) for every row x_i of `inputs`.
Matrix encode_batch(const Matrix& w_enc, std::span<const double> b_enc, const Matrix& inputs);

// Row-wise w_dec * h_i + b_dec for every row h_i of `codes`.
Matrix decode_batch(const Matrix& w_dec, std::span<const double> b_dec, const Matrix& codes);

// Bilinear resize with half-pixel centres and edge clamping, evaluated in
// integer fixed point so the output is identical on every platform.
void resize_bilinear(RgbView src, RgbSpan dst);

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace serial

namespace parallel {

void affine(const Matrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y);
Matrix encode_batch(const Matrix& w_enc, std::span<const double> b_enc, const Matrix& inputs);
Matrix decode_batch(const Matrix& w_dec, std::span<const double> b_dec, const Matrix& codes);
void resize_bilinear(RgbView src, RgbSpan dst);

// Runs body(i) for i in [0, count). Iterations must be independent.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace parallel

// Number of threads the parallel kernels will use (1 without OpenMP).
int thread_count() noexcept;

}  // namespace seeds::kernels
