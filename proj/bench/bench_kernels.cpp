#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "asvs/kernels.hpp"

namespace {

std::vector<float> random_matrix(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

// Decoder-sized products: frames x 448 times 448 x 448, and the GLU conv
// shape (448*3 -> 448).
template <bool Parallel>
void BM_Gemm(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto n = static_cast<std::size_t>(state.range(2));
  const auto a = random_matrix(m * k, 1);
  const auto b = random_matrix(k * n, 2);
  std::vector<float> c(m * n);
  for (auto _ : state) {
    if constexpr (Parallel)
      asvs::kernels::omp::gemm(m, n, k, a.data(), b.data(), c.data(), false);
    else
      asvs::kernels::serial::gemm(m, n, k, a.data(), b.data(), c.data(), false);
    benchmark::DoNotOptimize(c.data());
  }
  state.counters["GFLOPS"] = benchmark::Counter(
      2.0 * static_cast<double>(m * n * k) * static_cast<double>(state.iterations()),
      benchmark::Counter::kIsRate, benchmark::Counter::kIs1000);
}

void BM_Im2col(benchmark::State& state) {
  const auto channels = static_cast<std::size_t>(state.range(0));
  const auto time = static_cast<std::size_t>(state.range(1));
  const auto x = random_matrix(channels * time, 3);
  std::vector<float> cols(channels * 3 * time);
  for (auto _ : state) {
    asvs::kernels::omp::im2col(channels, time, 3, x.data(), cols.data());
    benchmark::DoNotOptimize(cols.data());
  }
}

}  // namespace

BENCHMARK(BM_Gemm<false>)->Args({64, 448, 448})->Args({448, 1344, 64});
BENCHMARK(BM_Gemm<true>)->Args({64, 448, 448})->Args({448, 1344, 64})->Args({256, 256, 256});
BENCHMARK(BM_Im2col)->Args({448, 64})->Args({448, 667});

BENCHMARK_MAIN();
