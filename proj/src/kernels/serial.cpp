#include <algorithm>

#include "resize_detail.hpp"
#include "seeds/error.hpp"
#include "seeds/kernels.hpp"

namespace seeds::kernels::serial {

void affine(const Matrix& w, std::span<const double> x, std::span<const double> b, std::span<double> y) {
  require(x.size() == w.cols() && b.size() == w.rows() && y.size() == w.rows(), ErrorCode::DimMismatch,
          "affine: operand sizes do not match matrix shape");
  for (std::size_t r = 0; r < w.rows(); ++r) y[r] = detail::row_dot(w.row(r), x) + b[r];
}

Matrix encode_batch(const Matrix& w_enc, std::span<const double> b_enc, const Matrix& inputs) {
  require(inputs.cols() == w_enc.cols(), ErrorCode::DimMismatch, "encode_batch: input width != n");
  Matrix out(inputs.rows(), w_enc.rows());
  for (std::size_t i = 0; i < inputs.rows(); ++i) {
    affine(w_enc, inputs.row(i), b_enc, out.row(i));
    for (double& v : out.row(i)) v = std::max(v, 0.0);
  }
  return out;
}

Matrix decode_batch(const Matrix& w_dec, std::span<const double> b_dec, const Matrix& codes) {
  require(codes.cols() == w_dec.cols(), ErrorCode::DimMismatch, "decode_batch: code width != m");
  Matrix out(codes.rows(), w_dec.rows());
  for (std::size_t i = 0; i < codes.rows(); ++i) affine(w_dec, codes.row(i), b_dec, out.row(i));
  return out;
}

void resize_bilinear(RgbView src, RgbSpan dst) {
  const auto xs = detail::axis_taps(src.width, dst.width);
  const auto ys = detail::axis_taps(src.height, dst.height);
  for (int y = 0; y < dst.height; ++y) detail::resize_row(src, dst, xs, ys[static_cast<std::size_t>(y)], y);
}

void for_each_index(std::size_t count, const std::function<void(std::size_t)>& body) {
  for (std::size_t i = 0; i < count; ++i) body(i);
}

}  // namespace seeds::kernels::serial
