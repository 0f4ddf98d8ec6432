#pragma once

// Differentiable primitives. Shapes are row-major; sequence tensors are
// either time-major [T x C] (linear layers, attention) or channel-major
// [C x T] (convolutions). A scalar has shape {}.

#include <cstddef>
#include <span>
#include <vector>

#include "asvs/rng.hpp"
#include "asvs/tensor.hpp"

namespace asvs {

// Matrix product of [m x k] and [k x n].
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// Same-padded 1-D convolution (cross-correlation, stride 1).
// x: [c_in x T], w: [c_out x c_in x kernel], bias: [c_out] or undefined.
// kernel must be odd.
template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias = {});

// Elementwise, identical shapes.
template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor);

// x: [R x C] plus bias [C] broadcast over rows.
template <typename T>
Tensor<T> add_row_bias(const Tensor<T>& x, const Tensor<T>& bias);

// Concatenation of 2-D tensors along axis 0 (rows) or 1 (columns).
template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis);

// Rows [begin, end) of a 2-D tensor.
template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, std::size_t begin, std::size_t end);
// Columns [begin, end) of a 2-D tensor.
template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, std::size_t begin, std::size_t end);

template <typename T>
Tensor<T> transpose(const Tensor<T>& x);
template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);

// Row i of x (a vector, or a single-row matrix) repeated counts[i] times.
// x: [R x C] (or [C] with one count), result [sum(counts) x C].
template <typename T>
Tensor<T> repeat_rows(const Tensor<T>& x, std::span<const std::size_t> counts);

// Rows of table [V x D] gathered by ids; the ids themselves carry no gradient.
template <typename T>
Tensor<T> embedding(const Tensor<T>& table, std::span<const std::size_t> ids);

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x);
template <typename T>
Tensor<T> relu(const Tensor<T>& x);
template <typename T>
Tensor<T> abs(const Tensor<T>& x);
template <typename T>
Tensor<T> log(const Tensor<T>& x);
// log(1 + exp(x)), stable for large |x|.
template <typename T>
Tensor<T> softplus(const Tensor<T>& x);

// Softmax over the last axis (each row of a matrix, or the whole vector).
template <typename T>
Tensor<T> softmax(const Tensor<T>& x);

template <typename T>
Tensor<T> sum(const Tensor<T>& x);
template <typename T>
Tensor<T> mean(const Tensor<T>& x);
// Mean of a 2-D tensor over `axis`; the result drops that axis.
template <typename T>
Tensor<T> mean_axis(const Tensor<T>& x, std::size_t axis);

// Single element as a scalar tensor.
template <typename T>
Tensor<T> pick(const Tensor<T>& x, std::size_t index);

// Mean binary cross-entropy between logits and {0,1} targets.
template <typename T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, const Tensor<T>& targets);

// Inverted dropout. In eval mode (training == false) or with p == 0 the input
// tensor itself is returned.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double p, bool training, Rng& rng);

// Identity forward; backward multiplies the incoming gradient by -lambda.
template <typename T>
Tensor<T> gradient_reversal(const Tensor<T>& x, T lambda);

}  // namespace asvs
