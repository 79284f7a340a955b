// Serial reference vs OpenMP kernels. Run with OMP_NUM_THREADS=N to vary
// the thread count of the parallel variants.

#include <benchmark/benchmark.h>

#include <random>

#include "seeds/decomposer.hpp"
#include "seeds/image.hpp"
#include "seeds/kernels.hpp"

namespace k = seeds::kernels;
using seeds::Matrix;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

// Encoder shaped like a CLIP-sized SAE: n = 768 inputs, m = 8n features.
struct EncodeSetup {
  std::size_t n = 768, m = 6144, batch;
  Matrix w, inputs;
  std::vector<double> b;
  explicit EncodeSetup(std::size_t batch_size)
      : batch(batch_size), w(m, n, gaussian(m * n, 1)), inputs(batch, n, gaussian(batch * n, 2)), b(gaussian(m, 3)) {}
};

template <Matrix (*Encode)(const Matrix&, std::span<const double>, const Matrix&)>
void BM_Encode(benchmark::State& state) {
  const EncodeSetup s(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(Encode(s.w, s.b, s.inputs));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

seeds::Image photo(int w, int h) {
  seeds::Image img(w, h);
  std::mt19937 rng(4);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng());
  return img;
}

template <void (*Resize)(k::RgbView, k::RgbSpan)>
void BM_Resize(benchmark::State& state) {
  const auto src = photo(1920, 1080);
  seeds::Image dst(512, 512);
  for (auto _ : state) {
    Resize(src.view(), dst.span());
    benchmark::ClobberMemory();
  }
}

std::vector<seeds::Embedding> atoms(std::size_t count, std::size_t dim) {
  std::vector<seeds::Embedding> out;
  for (std::size_t i = 0; i < count; ++i) out.emplace_back(gaussian(dim, 100 + i));
  return out;
}

// All restarts in parallel vs the same restarts one after another.
void BM_KMeansParallel(benchmark::State& state) {
  const auto pts = atoms(32, 768);
  for (auto _ : state) benchmark::DoNotOptimize(seeds::decomposer::kmeans2(pts, 0));
}

void BM_KMeansSerial(benchmark::State& state) {
  const auto pts = atoms(32, 768);
  for (auto _ : state)
    for (int r = 0; r < seeds::decomposer::kKMeansRestarts; ++r)
      benchmark::DoNotOptimize(seeds::decomposer::kmeans2_single(pts, static_cast<std::uint64_t>(r)));
}

}  // namespace

BENCHMARK(BM_Encode<k::serial::encode_batch>)->Name("encode_batch/serial")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Encode<k::parallel::encode_batch>)->Name("encode_batch/parallel")->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Resize<k::serial::resize_bilinear>)->Name("resize_1080p_to_512/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Resize<k::parallel::resize_bilinear>)->Name("resize_1080p_to_512/parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KMeansSerial)->Name("kmeans2_32_restarts/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KMeansParallel)->Name("kmeans2_32_restarts/parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
