#include <algorithm>
#include <exception>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "resize_detail.hpp"
#include "seeds/error.hpp"
#include "seeds/kernels.hpp"

namespace seeds::kernels {

int thread_count() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

namespace parallel {

void affine(const Matrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y) {
  require(x.size() == w.cols() && b.size() == w.rows() && y.size() == w.rows(), ErrorCode::DimMismatch,
          "affine: operand sizes do not match matrix shape");
  const auto rows = static_cast<std::ptrdiff_t>(w.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    const auto ur = static_cast<std::size_t>(r);
    y[ur] = detail::row_dot(w.row(ur), x) + b[ur];
  }
}

Matrix encode_batch(const Matrix& w_enc, std::span<const double> b_enc, const Matrix& inputs) {
  require(inputs.cols() == w_enc.cols(), ErrorCode::DimMismatch, "encode_batch: input width != n");
  require(b_enc.size() == w_enc.rows(), ErrorCode::DimMismatch, "encode_batch: bias length != m");
  Matrix out(inputs.rows(), w_enc.rows());
  const auto n = static_cast<std::ptrdiff_t>(inputs.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    auto y = out.row(ui);
    for (std::size_t r = 0; r < w_enc.rows(); ++r)
      y[r] = std::max(detail::row_dot(w_enc.row(r), inputs.row(ui)) + b_enc[r], 0.0);
  }
  return out;
}

Matrix decode_batch(const Matrix& w_dec, std::span<const double> b_dec, const Matrix& codes) {
  require(codes.cols() == w_dec.cols(), ErrorCode::DimMismatch, "decode_batch: code width != m");
  require(b_dec.size() == w_dec.rows(), ErrorCode::DimMismatch, "decode_batch: bias length != n");
  Matrix out(codes.rows(), w_dec.rows());
  const auto n = static_cast<std::ptrdiff_t>(codes.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    auto y = out.row(ui);
    for (std::size_t r = 0; r < w_dec.rows(); ++r) y[r] = detail::row_dot(w_dec.row(r), codes.row(ui)) + b_dec[r];
  }
  return out;
}

void resize_bilinear(RgbView src, RgbSpan dst) {
  const auto xs = detail::axis_taps(src.width, dst.width);
  const auto ys = detail::axis_taps(src.height, dst.height);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < dst.height; ++y) detail::resize_row(src, dst, xs, ys[static_cast<std::size_t>(y)], y);
}

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body) {
  // Exceptions must not cross the OpenMP region; keep the one from the lowest
  // index so the error matches what the serial loop would raise.
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::ptrdiff_t>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace parallel
}  // namespace seeds::kernels
