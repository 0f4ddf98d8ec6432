#pragma once

// Dense kernels behind the differentiable ops. Every kernel exists twice:
// `serial::` is the straightforward reference used by the tests, `omp::` is
// the blocked OpenMP version the ops call. Both are row-major and both
// produce each output element with a fixed reduction order, so results do
// not depend on the thread count.

#include <cstddef>
#include <span>

namespace asvs::kernels {

/// Caps the OpenMP worker pool (no-op when n == 0).
void set_num_threads(int n);
int num_threads();

namespace serial {

// C[m x n] (+)= A[m x k] * B[k x n]
template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate);

// C[m x n] (+)= A[k x m]^T * B[k x n]
template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate);

// C[m x n] (+)= A[m x k] * B[n x k]^T
template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate);

// cols[(ci*kernel + j) x time] = x[ci, t + j - kernel/2], zero outside.
template <typename T>
void im2col(std::size_t channels, std::size_t time, std::size_t kernel, const T* x, T* cols);

// Adjoint of im2col: dx[ci, t + j - kernel/2] += dcols[(ci*kernel + j), t].
template <typename T>
void col2im(std::size_t channels, std::size_t time, std::size_t kernel, const T* dcols, T* dx);

}  // namespace serial

namespace omp {

template <typename T>
void gemm(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
          bool accumulate);

template <typename T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate);

template <typename T>
void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
             bool accumulate);

template <typename T>
void im2col(std::size_t channels, std::size_t time, std::size_t kernel, const T* x, T* cols);

template <typename T>
void col2im(std::size_t channels, std::size_t time, std::size_t kernel, const T* dcols, T* dx);

}  // namespace omp

}  // namespace asvs::kernels
