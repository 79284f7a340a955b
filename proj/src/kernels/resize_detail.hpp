#pragma once

#include <cstdint>
#include <vector>

#include "seeds/kernels.hpp"

namespace seeds::kernels::detail {

inline double row_dot(std::span<const double> row, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * x[c];
  return s;
}

struct Tap {
  int i0;
  int i1;
  std::int64_t frac;  // weight of i1, in units of 1 / (1 << kResizeFracBits)
};

// Source taps for each destination coordinate. The continuous source
// position of destination sample d is ((2d + 1) * src - dst) / (2 * dst),
// evaluated exactly in integers.
inline std::vector<Tap> axis_taps(int src, int dst) {
  constexpr std::int64_t one = std::int64_t{1} << kResizeFracBits;
  std::vector<Tap> taps(static_cast<std::size_t>(dst));
  const std::int64_t denom = 2 * static_cast<std::int64_t>(dst);
  for (int d = 0; d < dst; ++d) {
    const std::int64_t num = (2 * static_cast<std::int64_t>(d) + 1) * src - dst;
    Tap t{0, 0, 0};
    if (num > 0) {
      std::int64_t i0 = num / denom;
      std::int64_t frac = ((num % denom) * one + denom / 2) / denom;
      if (frac == one) {
        ++i0;
        frac = 0;
      }
      if (i0 >= src - 1) {
        t = {src - 1, src - 1, 0};
      } else {
        t = {static_cast<int>(i0), static_cast<int>(i0 + 1), frac};
      }
    }
    taps[static_cast<std::size_t>(d)] = t;
  }
  return taps;
}

inline void resize_row(RgbView src, RgbSpan dst, const std::vector<Tap>& xs, const Tap& ty, int y) {
  constexpr std::int64_t one = std::int64_t{1} << kResizeFracBits;
  constexpr int shift = 2 * kResizeFracBits;
  const auto px = [&](int sx, int sy, int ch) -> std::int64_t {
    return src.pixels[(static_cast<std::size_t>(sy) * static_cast<std::size_t>(src.width) +
                       static_cast<std::size_t>(sx)) * 3 + static_cast<std::size_t>(ch)];
  };
  for (int x = 0; x < dst.width; ++x) {
    const Tap& tx = xs[static_cast<std::size_t>(x)];
    for (int ch = 0; ch < 3; ++ch) {
      const std::int64_t top = px(tx.i0, ty.i0, ch) * (one - tx.frac) + px(tx.i1, ty.i0, ch) * tx.frac;
      const std::int64_t bot = px(tx.i0, ty.i1, ch) * (one - tx.frac) + px(tx.i1, ty.i1, ch) * tx.frac;
      const std::int64_t v = top * (one - ty.frac) + bot * ty.frac;
      dst.pixels[(static_cast<std::size_t>(y) * static_cast<std::size_t>(dst.width) + static_cast<std::size_t>(x)) * 3 +
                 static_cast<std::size_t>(ch)] =
          static_cast<std::uint8_t>((v + (std::int64_t{1} << (shift - 1))) >> shift);
    }
  }
}

}  // namespace seeds::kernels::detail
