#pragma once

// Shared fixtures and independent reference implementations for the tests.
// The oracles here are written directly from the maths with plain loops and
// share no code with the library kernels they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "seeds/error.hpp"
#include "seeds/image.hpp"
#include "seeds/sae.hpp"
#include "seeds/tensor.hpp"

namespace seeds::testing {

inline std::filesystem::path data_dir() { return SEEDS_TEST_DATA_DIR; }
inline std::filesystem::path asset_dir() { return SEEDS_ASSET_DIR; }
inline std::filesystem::path fixture(const std::string& name) { return data_dir() / "fixtures" / name; }

class TempDir {
 public:
  TempDir() {
    std::string templ = (std::filesystem::temp_directory_path() / "seeds-test-XXXXXX").string();
    path_ = ::mkdtemp(templ.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

// Code of the seeds::Error thrown by f, or nullopt when it returns normally.
inline std::optional<ErrorCode> error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline Image solid(int w, int h, Rgb c) { return Image(w, h, c); }

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  return Matrix(r, c, random_vector(rng, r * c, scale));
}

inline sae::SaeModel random_sae(std::mt19937_64& rng, std::size_t n, std::size_t m, double coeff) {
  return sae::SaeModel(random_matrix(rng, m, n, 0.5), random_vector(rng, m, 0.1), random_matrix(rng, n, m, 0.5),
                       random_vector(rng, n, 0.1), coeff);
}

namespace oracle {

// h_j = max(0, sum_i W_enc[j][i] a_i + b_enc_j)
inline std::vector<double> encode(const sae::SaeModel& model, const std::vector<double>& a) {
  std::vector<double> h(model.m());
  for (std::size_t j = 0; j < model.m(); ++j) {
    double pre = model.b_enc()[j];
    for (std::size_t i = 0; i < model.n(); ++i) pre += model.w_enc()(j, i) * a[i];
    h[j] = pre > 0.0 ? pre : 0.0;
  }
  return h;
}

// a_hat_i = sum_j W_dec[i][j] h_j + b_dec_i
inline std::vector<double> decode(const sae::SaeModel& model, const std::vector<double>& h) {
  std::vector<double> out(model.n());
  for (std::size_t i = 0; i < model.n(); ++i) {
    double s = model.b_dec()[i];
    for (std::size_t j = 0; j < model.m(); ++j) s += model.w_dec()(i, j) * h[j];
    out[i] = s;
  }
  return out;
}

inline double loss(const sae::SaeModel& model, const std::vector<double>& a) {
  const auto h = encode(model, a);
  const auto r = decode(model, h);
  double l = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) l += (a[i] - r[i]) * (a[i] - r[i]);
  double l1 = 0.0;
  for (double v : h) l1 += std::fabs(v);
  return l + model.sparsity_coeff() * l1;
}

// Minimum within-cluster sum of squares over every split of the points
// into two non-empty groups (2^(n-1) - 1 candidates).
inline double best_two_partition_sse(const std::vector<std::vector<double>>& pts) {
  const std::size_t n = pts.size();
  const std::size_t d = pts[0].size();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << (n - 1)); ++mask) {
    double sse = 0.0;
    for (int side = 0; side < 2; ++side) {
      std::vector<double> mean(d, 0.0);
      std::size_t count = 0;
      for (std::size_t p = 0; p < n; ++p)
        if (((mask >> p) & 1U) == static_cast<std::uint64_t>(side)) {
          for (std::size_t k = 0; k < d; ++k) mean[k] += pts[p][k];
          ++count;
        }
      for (auto& v : mean) v /= static_cast<double>(count);
      for (std::size_t p = 0; p < n; ++p)
        if (((mask >> p) & 1U) == static_cast<std::uint64_t>(side))
          for (std::size_t k = 0; k < d; ++k) sse += (pts[p][k] - mean[k]) * (pts[p][k] - mean[k]);
    }
    best = std::min(best, sse);
  }
  return best;
}

// Float bilinear resize, half-pixel centres, clamped edges.
inline std::vector<double> bilinear(const Image& src, int dw, int dh) {
  std::vector<double> out(static_cast<std::size_t>(dw) * dh * 3);
  auto coord = [](int d, int s, int dn) {
    double pos = (d + 0.5) * s / dn - 0.5;
    pos = std::clamp(pos, 0.0, static_cast<double>(s - 1));
    const int i0 = static_cast<int>(std::floor(pos));
    return std::tuple<int, int, double>{i0, std::min(i0 + 1, s - 1), pos - i0};
  };
  for (int y = 0; y < dh; ++y) {
    const auto [y0, y1, fy] = coord(y, src.height(), dh);
    for (int x = 0; x < dw; ++x) {
      const auto [x0, x1, fx] = coord(x, src.width(), dw);
      const Rgb p00 = src.at(x0, y0), p10 = src.at(x1, y0), p01 = src.at(x0, y1), p11 = src.at(x1, y1);
      const double c00[3] = {double(p00.r), double(p00.g), double(p00.b)};
      const double c10[3] = {double(p10.r), double(p10.g), double(p10.b)};
      const double c01[3] = {double(p01.r), double(p01.g), double(p01.b)};
      const double c11[3] = {double(p11.r), double(p11.g), double(p11.b)};
      for (int c = 0; c < 3; ++c) {
        const double top = c00[c] * (1 - fx) + c10[c] * fx;
        const double bot = c01[c] * (1 - fx) + c11[c] * fx;
        out[(static_cast<std::size_t>(y) * dw + x) * 3 + c] = top * (1 - fy) + bot * fy;
      }
    }
  }
  return out;
}

}  // namespace oracle
}  // namespace seeds::testing
