#include "asvs/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <vector>

namespace asvs::kernels {

void set_num_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int num_threads() { return omp_get_max_threads(); }

namespace serial {

template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T sum = accumulate ? c[i * n + j] : T(0);
      for (std::size_t p = 0; p < k; ++p) sum += a[i * k + p] * b[p * n + j];
      c[i * n + j] = sum;
    }
  }
}

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T sum = accumulate ? c[i * n + j] : T(0);
      for (std::size_t p = 0; p < k; ++p) sum += a[p * m + i] * b[p * n + j];
      c[i * n + j] = sum;
    }
  }
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      T sum = accumulate ? c[i * n + j] : T(0);
      for (std::size_t p = 0; p < k; ++p) sum += a[i * k + p] * b[j * k + p];
      c[i * n + j] = sum;
    }
  }
}

template <typename T>
void im2col(std::size_t channels, std::size_t time, std::size_t kernel, const T* x, T* cols) {
  const auto pad = static_cast<std::ptrdiff_t>(kernel / 2);
  for (std::size_t ci = 0; ci < channels; ++ci) {
    for (std::size_t j = 0; j < kernel; ++j) {
      T* row = cols + (ci * kernel + j) * time;
      for (std::size_t t = 0; t < time; ++t) {
        const auto src = static_cast<std::ptrdiff_t>(t + j) - pad;
        row[t] = (src >= 0 && src < static_cast<std::ptrdiff_t>(time)) ? x[ci * time + src] : T(0);
      }
    }
  }
}

template <typename T>
void col2im(std::size_t channels, std::size_t time, std::size_t kernel, const T* dcols, T* dx) {
  const auto pad = static_cast<std::ptrdiff_t>(kernel / 2);
  for (std::size_t ci = 0; ci < channels; ++ci) {
    for (std::size_t j = 0; j < kernel; ++j) {
      const T* row = dcols + (ci * kernel + j) * time;
      for (std::size_t t = 0; t < time; ++t) {
        const auto dst = static_cast<std::ptrdiff_t>(t + j) - pad;
        if (dst >= 0 && dst < static_cast<std::ptrdiff_t>(time)) dx[ci * time + dst] += row[t];
      }
    }
  }
}

}  // namespace serial

namespace omp {
namespace {

// Register tile of kMr rows by two 512-bit vectors. GCC/Clang vector
// extensions keep the accumulators in registers; plain arrays spill.
constexpr std::size_t kMr = 6;
constexpr std::size_t kKc = 256;

template <typename T>
struct Lane {
  static constexpr std::size_t width = 64 / sizeof(T);
  typedef T type __attribute__((vector_size(64), aligned(alignof(T)), may_alias));
};

template <typename T, std::size_t Rows, std::size_t Vectors>
inline void tile_full(std::size_t n, std::size_t k, std::size_t k0, std::size_t k1, const T* a,
                      const T* b, T* c) {
  using V = typename Lane<T>::type;
  constexpr std::size_t w = Lane<T>::width;
  V acc[Rows][Vectors];
  for (std::size_t r = 0; r < Rows; ++r)
    for (std::size_t q = 0; q < Vectors; ++q)
      acc[r][q] = *reinterpret_cast<const V*>(c + r * n + q * w);
  for (std::size_t p = k0; p < k1; ++p) {
    V bv[Vectors];
    for (std::size_t q = 0; q < Vectors; ++q)
      bv[q] = *reinterpret_cast<const V*>(b + p * n + q * w);
    for (std::size_t r = 0; r < Rows; ++r) {
      const T av = a[r * k + p];
      for (std::size_t q = 0; q < Vectors; ++q) acc[r][q] += av * bv[q];
    }
  }
  for (std::size_t r = 0; r < Rows; ++r)
    for (std::size_t q = 0; q < Vectors; ++q)
      *reinterpret_cast<V*>(c + r * n + q * w) = acc[r][q];
}

template <typename T>
inline void tile_edge(std::size_t rows, std::size_t cols, std::size_t n, std::size_t k,
                      std::size_t k0, std::size_t k1, const T* a, const T* b, T* c) {
  for (std::size_t r = 0; r < rows; ++r) {
    T* crow = c + r * n;
    for (std::size_t p = k0; p < k1; ++p) {
      const T av = a[r * k + p];
      const T* brow = b + p * n;
      for (std::size_t q = 0; q < cols; ++q) crow[q] += av * brow[q];
    }
  }
}

template <typename T, std::size_t Rows>
inline void row_block(std::size_t n, std::size_t k, std::size_t k0, std::size_t k1,
                      std::size_t cols, const T* a, const T* b, T* c) {
  constexpr std::size_t w = Lane<T>::width;
  if (cols == 2 * w) {
    tile_full<T, Rows, 2>(n, k, k0, k1, a, b, c);
  } else if (cols >= w) {
    tile_full<T, Rows, 1>(n, k, k0, k1, a, b, c);
    if (cols > w) tile_edge<T>(Rows, cols - w, n, k, k0, k1, a, b + w, c + w);
  } else {
    tile_edge<T>(Rows, cols, n, k, k0, k1, a, b, c);
  }
}

// One column panel [j0, j0 + cols) of C for rows [0, m), k-block [k0, k1).
template <typename T>
inline void panel(std::size_t m, std::size_t n, std::size_t k, std::size_t k0, std::size_t k1,
                  std::size_t cols, const T* a, const T* b, T* c) {
  std::size_t i = 0;
  for (; i + kMr <= m; i += kMr) row_block<T, kMr>(n, k, k0, k1, cols, a + i * k, b, c + i * n);
  const T* ai = a + i * k;
  T* ci = c + i * n;
  switch (m - i) {
    case 5: row_block<T, 5>(n, k, k0, k1, cols, ai, b, ci); break;
    case 4: row_block<T, 4>(n, k, k0, k1, cols, ai, b, ci); break;
    case 3: row_block<T, 3>(n, k, k0, k1, cols, ai, b, ci); break;
    case 2: row_block<T, 2>(n, k, k0, k1, cols, ai, b, ci); break;
    case 1: row_block<T, 1>(n, k, k0, k1, cols, ai, b, ci); break;
    default: break;
  }
}

template <typename T>
std::vector<T> transposed(std::size_t rows, std::size_t cols, const T* src) {
  std::vector<T> out(rows * cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[j * rows + i] = src[i * cols + j];
  return out;
}

}  // namespace

template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate) {
  constexpr std::size_t w = Lane<T>::width;
  constexpr std::size_t nr = 2 * w;
  if (!accumulate) std::fill(c, c + m * n, T(0));
  if (m == 0 || n == 0 || k == 0) return;
  const auto panels = static_cast<std::ptrdiff_t>((n + nr - 1) / nr);
  // Each C column panel belongs to one thread; k blocks are visited in order.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t pi = 0; pi < panels; ++pi) {
    const std::size_t j0 = static_cast<std::size_t>(pi) * nr;
    const std::size_t cols = std::min(nr, n - j0);
    if (cols % w == 0) {
      for (std::size_t k0 = 0; k0 < k; k0 += kKc)
        panel<T>(m, n, k, k0, std::min(k, k0 + kKc), cols, a, b + j0, c + j0);
      continue;
    }
    // Ragged panel: copy it into zero-padded buffers so every tile is a full
    // vector wide. The padding columns are discarded.
    const std::size_t wide = (cols + w - 1) / w * w;
    std::vector<T> bp(k * wide, T(0)), cp(m * wide, T(0));
    for (std::size_t p = 0; p < k; ++p)
      std::copy_n(b + p * n + j0, cols, bp.data() + p * wide);
    for (std::size_t i = 0; i < m; ++i) std::copy_n(c + i * n + j0, cols, cp.data() + i * wide);
    for (std::size_t k0 = 0; k0 < k; k0 += kKc)
      panel<T>(m, wide, k, k0, std::min(k, k0 + kKc), wide, a, bp.data(), cp.data());
    for (std::size_t i = 0; i < m; ++i) std::copy_n(cp.data() + i * wide, cols, c + i * n + j0);
  }
}

// C = op(A) op(B) through the transposed product C^T = op(B)^T op(A)^T. Each
// element still sums over k in order, so the result matches the direct form.
template <typename T>
void gemm_via_transpose(std::size_t m, std::size_t n, std::size_t k, const T* bt_rows,
                        const T* at_cols, T* c, bool accumulate) {
  std::vector<T> ct = accumulate ? transposed(m, n, c) : std::vector<T>(n * m);
  gemm(n, m, k, bt_rows, at_cols, ct.data(), accumulate);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < m; ++i) c[i * n + j] = ct[j * m + i];
}

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate) {
  // A is [k x m]. When it is the large operand (a weight in a backward pass)
  // copying B and C is cheaper than transposing A.
  if (k * n + (accumulate ? 2 : 1) * m * n < k * m) {
    const auto bt = transposed(k, n, b);
    gemm_via_transpose(m, n, k, bt.data(), a, c, accumulate);
    return;
  }
  const auto at = transposed(k, m, a);
  gemm(m, n, k, at.data(), b, c, accumulate);
}

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate) {
  // B is [n x k]; same trade-off with the roles swapped.
  if (m * k + (accumulate ? 2 : 1) * m * n < n * k) {
    const auto at = transposed(m, k, a);
    gemm_via_transpose(m, n, k, b, at.data(), c, accumulate);
    return;
  }
  const auto bt = transposed(n, k, b);
  gemm(m, n, k, a, bt.data(), c, accumulate);
}

template <typename T>
void im2col(std::size_t channels, std::size_t time, std::size_t kernel, const T* x, T* cols) {
  const auto pad = static_cast<std::ptrdiff_t>(kernel / 2);
  const auto st = static_cast<std::ptrdiff_t>(time);
  const auto total = static_cast<std::ptrdiff_t>(channels);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ci = 0; ci < total; ++ci) {
    for (std::size_t j = 0; j < kernel; ++j) {
      T* row = cols + (static_cast<std::size_t>(ci) * kernel + j) * time;
      const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - pad;
      for (std::ptrdiff_t t = 0; t < st; ++t) {
        const std::ptrdiff_t src = t + shift;
        row[t] = (src >= 0 && src < st) ? x[ci * st + src] : T(0);
      }
    }
  }
}

template <typename T>
void col2im(std::size_t channels, std::size_t time, std::size_t kernel, const T* dcols, T* dx) {
  const auto pad = static_cast<std::ptrdiff_t>(kernel / 2);
  const auto st = static_cast<std::ptrdiff_t>(time);
  const auto total = static_cast<std::ptrdiff_t>(channels);
  // Channels are disjoint in dx, so the channel loop is race-free.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ci = 0; ci < total; ++ci) {
    for (std::size_t j = 0; j < kernel; ++j) {
      const T* row = dcols + (static_cast<std::size_t>(ci) * kernel + j) * time;
      const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - pad;
      for (std::ptrdiff_t t = 0; t < st; ++t) {
        const std::ptrdiff_t dst = t + shift;
        if (dst >= 0 && dst < st) dx[ci * st + dst] += row[t];
      }
    }
  }
}

}  // namespace omp

#define ASVS_INSTANTIATE_KERNELS(NS, T)                                                        \
  template void NS::gemm<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*,     \
                            bool);                                                             \
  template void NS::gemm_tn<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*,  \
                               bool);                                                          \
  template void NS::gemm_nt<T>(std::size_t, std::size_t, std::size_t, const T*, const T*, T*,  \
                               bool);                                                          \
  template void NS::im2col<T>(std::size_t, std::size_t, std::size_t, const T*, T*);            \
  template void NS::col2im<T>(std::size_t, std::size_t, std::size_t, const T*, T*);

ASVS_INSTANTIATE_KERNELS(serial, float)
ASVS_INSTANTIATE_KERNELS(serial, double)
ASVS_INSTANTIATE_KERNELS(omp, float)
ASVS_INSTANTIATE_KERNELS(omp, double)

#undef ASVS_INSTANTIATE_KERNELS

}  // namespace asvs::kernels
