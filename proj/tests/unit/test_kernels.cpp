#include <doctest.h>

#include <cmath>
#include <vector>

#include "asvs/kernels.hpp"
#include "asvs/rng.hpp"

namespace {

template <typename T>
std::vector<T> random_values(std::size_t n, asvs::Rng& rng) {
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(rng.uniform(-1.0, 1.0));
  return v;
}

template <typename T>
double max_rel_diff(const std::vector<T>& a, const std::vector<T>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({1.0, std::abs(double(a[i])), std::abs(double(b[i]))});
    worst = std::max(worst, std::abs(double(a[i]) - double(b[i])) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE_TEMPLATE("parallel gemm variants agree with the serial reference", T, float, double) {
  asvs::Rng rng(11);
  const double tol = sizeof(T) == 4 ? 1e-5 : 1e-12;
  // Shapes straddle the 6-row / two-vector register tile and the k blocking;
  // the last three take the transposed-product route in gemm_tn / gemm_nt.
  const std::size_t shapes[][3] = {{1, 1, 1},   {5, 7, 3},    {6, 32, 9},   {13, 33, 300},
                                   {64, 66, 448}, {7, 100, 17}, {12, 16, 257}, {30, 48, 1},
                                   {100, 8, 60}, {8, 100, 60}, {300, 16, 96}};
  for (const auto& s : shapes) {
    const std::size_t m = s[0], n = s[1], k = s[2];
    CAPTURE(m);
    CAPTURE(n);
    CAPTURE(k);
    const auto a = random_values<T>(m * k, rng);
    const auto b = random_values<T>(k * n, rng);
    const auto c0 = random_values<T>(m * n, rng);

    for (bool acc : {false, true}) {
      auto ref = c0, got = c0;
      asvs::kernels::serial::gemm(m, n, k, a.data(), b.data(), ref.data(), acc);
      asvs::kernels::omp::gemm(m, n, k, a.data(), b.data(), got.data(), acc);
      CHECK(max_rel_diff(ref, got) <= tol);

      // A stored as [k x m], B stored as [n x k].
      ref = c0;
      got = c0;
      asvs::kernels::serial::gemm_tn(m, n, k, a.data(), b.data(), ref.data(), acc);
      asvs::kernels::omp::gemm_tn(m, n, k, a.data(), b.data(), got.data(), acc);
      CHECK(max_rel_diff(ref, got) <= tol);

      ref = c0;
      got = c0;
      asvs::kernels::serial::gemm_nt(m, n, k, a.data(), b.data(), ref.data(), acc);
      asvs::kernels::omp::gemm_nt(m, n, k, a.data(), b.data(), got.data(), acc);
      CHECK(max_rel_diff(ref, got) <= tol);
    }
  }
}

TEST_CASE("parallel gemm is bitwise independent of the thread count") {
  asvs::Rng rng(3);
  const std::size_t m = 37, n = 130, k = 290;
  const auto a = random_values<float>(m * k, rng);
  const auto b = random_values<float>(k * n, rng);
  std::vector<float> one(m * n), many(m * n);
  const int saved = asvs::kernels::num_threads();
  asvs::kernels::set_num_threads(1);
  asvs::kernels::omp::gemm(m, n, k, a.data(), b.data(), one.data(), false);
  asvs::kernels::set_num_threads(4);
  asvs::kernels::omp::gemm(m, n, k, a.data(), b.data(), many.data(), false);
  asvs::kernels::set_num_threads(saved);
  CHECK(one == many);
}

TEST_CASE("im2col and col2im match the serial reference") {
  asvs::Rng rng(5);
  for (std::size_t kernel : {1u, 3u, 5u}) {
    const std::size_t channels = 4, time = 9;
    const auto x = random_values<double>(channels * time, rng);
    std::vector<double> ref(channels * kernel * time), got(ref.size());
    asvs::kernels::serial::im2col(channels, time, kernel, x.data(), ref.data());
    asvs::kernels::omp::im2col(channels, time, kernel, x.data(), got.data());
    CHECK(ref == got);

    std::vector<double> dx_ref(channels * time, 0.0), dx_got(channels * time, 0.0);
    asvs::kernels::serial::col2im(channels, time, kernel, ref.data(), dx_ref.data());
    asvs::kernels::omp::col2im(channels, time, kernel, ref.data(), dx_got.data());
    CHECK(dx_ref == dx_got);
  }
}

TEST_CASE("im2col places zero padding at both ends") {
  const std::vector<double> x{1, 2, 3};
  std::vector<double> cols(9);
  asvs::kernels::omp::im2col<double>(1, 3, 3, x.data(), cols.data());
  CHECK(cols == std::vector<double>{0, 1, 2, 1, 2, 3, 2, 3, 0});
}
