#include "asvs/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "asvs/kernels.hpp"

namespace asvs {
namespace {

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

template <typename T>
bool wants(const NodePtr<T>& n) {
  return n && n->requires_grad;
}

template <typename T>
void require_rank(const Tensor<T>& x, std::size_t rank, const char* op) {
  if (x.rank() != rank)
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got shape " + shape_str(x.shape()));
}

template <typename T>
void require_same(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
}

template <typename T, typename Fwd, typename Deriv>
Tensor<T> unary(const Tensor<T>& x, Fwd fwd, Deriv deriv) {
  const auto xs = x.data();
  std::vector<T> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = fwd(xs[i]);
  return Tensor<T>::from_op(x.shape(), std::move(out), {x.node_ptr()}, [deriv](Node<T>& o) {
    auto& in = *o.inputs[0];
    auto g = in.grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * deriv(in.value[i], o.value[i]);
  });
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k)
    throw DimensionError("matmul: inner dimensions differ, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  std::vector<T> out(m * n);
  kernels::omp::gemm(m, n, k, a.data().data(), b.data().data(), out.data(), false);
  return Tensor<T>::from_op({m, n}, std::move(out), {a.node_ptr(), b.node_ptr()},
                            [m, n, k](Node<T>& o) {
                              auto& na = *o.inputs[0];
                              auto& nb = *o.inputs[1];
                              if (na.requires_grad)  // dA = dC * B^T
                                kernels::omp::gemm_nt(m, k, n, o.grad.data(), nb.value.data(),
                                                      na.grad_buffer().data(), true);
                              if (nb.requires_grad)  // dB = A^T * dC
                                kernels::omp::gemm_tn(k, n, m, na.value.data(), o.grad.data(),
                                                      nb.grad_buffer().data(), true);
                            });
}

template <typename T>
Tensor<T> conv1d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
  require_rank(x, 2, "conv1d");
  require_rank(w, 3, "conv1d");
  const std::size_t c_in = x.dim(0), time = x.dim(1);
  const std::size_t c_out = w.dim(0), kernel = w.dim(2);
  if (kernel % 2 == 0)
    throw ConfigError("conv1d: kernel size must be odd for same padding, got " +
                      std::to_string(kernel));
  if (w.dim(1) != c_in)
    throw DimensionError("conv1d: input " + shape_str(x.shape()) + " does not match weight " +
                         shape_str(w.shape()));
  if (bias.defined() && bias.shape() != Shape{c_out})
    throw DimensionError("conv1d: bias " + shape_str(bias.shape()) + " for " +
                         std::to_string(c_out) + " output channels");

  const std::size_t rows = c_in * kernel;
  auto cols = std::make_shared<std::vector<T>>(rows * time);
  kernels::omp::im2col(c_in, time, kernel, x.data().data(), cols->data());
  std::vector<T> out(c_out * time);
  kernels::omp::gemm(c_out, time, rows, w.data().data(), cols->data(), out.data(), false);
  if (bias.defined()) {
    const auto b = bias.data();
    for (std::size_t co = 0; co < c_out; ++co)
      for (std::size_t t = 0; t < time; ++t) out[co * time + t] += b[co];
  }
  return Tensor<T>::from_op(
      {c_out, time}, std::move(out), {x.node_ptr(), w.node_ptr(), bias.node_ptr()},
      [=](Node<T>& o) {
        auto& nx = *o.inputs[0];
        auto& nw = *o.inputs[1];
        if (nw.requires_grad)  // dW = dY * cols^T
          kernels::omp::gemm_nt(c_out, rows, time, o.grad.data(), cols->data(),
                                nw.grad_buffer().data(), true);
        if (nx.requires_grad) {  // dcols = W^T * dY, folded back onto x
          std::vector<T> dcols(rows * time);
          kernels::omp::gemm_tn(rows, time, c_out, nw.value.data(), o.grad.data(), dcols.data(),
                                false);
          kernels::omp::col2im(c_in, time, kernel, dcols.data(), nx.grad_buffer().data());
        }
        if (wants(o.inputs[2])) {
          auto gb = o.inputs[2]->grad_buffer();
          for (std::size_t co = 0; co < c_out; ++co)
            for (std::size_t t = 0; t < time; ++t) gb[co] += o.grad[co * time + t];
        }
      });
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same(a, b, "add");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return Tensor<T>::from_op(a.shape(), std::move(out), {a.node_ptr(), b.node_ptr()},
                            [](Node<T>& o) {
                              for (auto& in : o.inputs) {
                                if (!in->requires_grad) continue;
                                auto g = in->grad_buffer();
                                for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
                              }
                            });
}

template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same(a, b, "sub");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return Tensor<T>::from_op(a.shape(), std::move(out), {a.node_ptr(), b.node_ptr()},
                            [](Node<T>& o) {
                              if (o.inputs[0]->requires_grad) {
                                auto g = o.inputs[0]->grad_buffer();
                                for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
                              }
                              if (o.inputs[1]->requires_grad) {
                                auto g = o.inputs[1]->grad_buffer();
                                for (std::size_t i = 0; i < g.size(); ++i) g[i] -= o.grad[i];
                              }
                            });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same(a, b, "mul");
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return Tensor<T>::from_op(a.shape(), std::move(out), {a.node_ptr(), b.node_ptr()},
                            [](Node<T>& o) {
                              auto& na = *o.inputs[0];
                              auto& nb = *o.inputs[1];
                              if (na.requires_grad) {
                                auto g = na.grad_buffer();
                                for (std::size_t i = 0; i < g.size(); ++i)
                                  g[i] += o.grad[i] * nb.value[i];
                              }
                              if (nb.requires_grad) {
                                auto g = nb.grad_buffer();
                                for (std::size_t i = 0; i < g.size(); ++i)
                                  g[i] += o.grad[i] * na.value[i];
                              }
                            });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * factor;
  return Tensor<T>::from_op(x.shape(), std::move(out), {x.node_ptr()}, [factor](Node<T>& o) {
    auto g = o.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i] * factor;
  });
}

template <typename T>
Tensor<T> add_row_bias(const Tensor<T>& x, const Tensor<T>& bias) {
  require_rank(x, 2, "add_row_bias");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  if (bias.shape() != Shape{cols})
    throw DimensionError("add_row_bias: bias " + shape_str(bias.shape()) + " for input " +
                         shape_str(x.shape()));
  std::vector<T> out(x.data().begin(), x.data().end());
  const auto b = bias.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] += b[c];
  return Tensor<T>::from_op(x.shape(), std::move(out), {x.node_ptr(), bias.node_ptr()},
                            [rows, cols](Node<T>& o) {
                              if (o.inputs[0]->requires_grad) {
                                auto g = o.inputs[0]->grad_buffer();
                                for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
                              }
                              if (o.inputs[1]->requires_grad) {
                                auto g = o.inputs[1]->grad_buffer();
                                for (std::size_t r = 0; r < rows; ++r)
                                  for (std::size_t c = 0; c < cols; ++c)
                                    g[c] += o.grad[r * cols + c];
                              }
                            });
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, std::size_t axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  if (axis > 1) throw DimensionError("concat: axis must be 0 or 1");
  for (const auto& p : parts) require_rank(p, 2, "concat");
  const std::size_t other = axis == 0 ? 1 : 0;
  const std::size_t fixed = parts[0].dim(other);
  std::vector<std::size_t> extents;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.dim(other) != fixed)
      throw DimensionError("concat: " + shape_str(parts[0].shape()) + " vs " +
                           shape_str(p.shape()) + " along axis " + std::to_string(axis));
    extents.push_back(p.dim(axis));
    total += p.dim(axis);
  }
  Shape shape = axis == 0 ? Shape{total, fixed} : Shape{fixed, total};
  std::vector<T> out(total * fixed);
  std::vector<NodePtr<T>> inputs;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto src = parts[i].data();
    if (axis == 0) {
      std::copy(src.begin(), src.end(), out.begin() + static_cast<std::ptrdiff_t>(offset * fixed));
    } else {
      for (std::size_t r = 0; r < fixed; ++r)
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(r * extents[i]), extents[i],
                    out.begin() + static_cast<std::ptrdiff_t>(r * total + offset));
    }
    offset += extents[i];
    inputs.push_back(parts[i].node_ptr());
  }
  return Tensor<T>::from_op(
      std::move(shape), std::move(out), std::move(inputs),
      [axis, fixed, total, extents](Node<T>& o) {
        std::size_t off = 0;
        for (std::size_t i = 0; i < extents.size(); ++i) {
          if (o.inputs[i]->requires_grad) {
            auto g = o.inputs[i]->grad_buffer();
            if (axis == 0) {
              for (std::size_t j = 0; j < g.size(); ++j) g[j] += o.grad[off * fixed + j];
            } else {
              for (std::size_t r = 0; r < fixed; ++r)
                for (std::size_t c = 0; c < extents[i]; ++c)
                  g[r * extents[i] + c] += o.grad[r * total + off + c];
            }
          }
          off += extents[i];
        }
      });
}

template <typename T>
Tensor<T> slice_rows(const Tensor<T>& x, std::size_t begin, std::size_t end) {
  require_rank(x, 2, "slice_rows");
  if (begin > end || end > x.dim(0))
    throw IndexError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") outside " + shape_str(x.shape()));
  const std::size_t cols = x.dim(1);
  const auto src = x.data();
  std::vector<T> out(src.begin() + static_cast<std::ptrdiff_t>(begin * cols),
                     src.begin() + static_cast<std::ptrdiff_t>(end * cols));
  return Tensor<T>::from_op({end - begin, cols}, std::move(out), {x.node_ptr()},
                            [begin, cols](Node<T>& o) {
                              auto g = o.inputs[0]->grad_buffer();
                              for (std::size_t i = 0; i < o.grad.size(); ++i)
                                g[begin * cols + i] += o.grad[i];
                            });
}

template <typename T>
Tensor<T> slice_cols(const Tensor<T>& x, std::size_t begin, std::size_t end) {
  require_rank(x, 2, "slice_cols");
  if (begin > end || end > x.dim(1))
    throw IndexError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") outside " + shape_str(x.shape()));
  const std::size_t rows = x.dim(0), cols = x.dim(1), width = end - begin;
  std::vector<T> out(rows * width);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < width; ++c) out[r * width + c] = x[r * cols + begin + c];
  return Tensor<T>::from_op({rows, width}, std::move(out), {x.node_ptr()},
                            [rows, cols, width, begin](Node<T>& o) {
                              auto g = o.inputs[0]->grad_buffer();
                              for (std::size_t r = 0; r < rows; ++r)
                                for (std::size_t c = 0; c < width; ++c)
                                  g[r * cols + begin + c] += o.grad[r * width + c];
                            });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& x) {
  require_rank(x, 2, "transpose");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  std::vector<T> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = x[r * cols + c];
  return Tensor<T>::from_op({cols, rows}, std::move(out), {x.node_ptr()},
                            [rows, cols](Node<T>& o) {
                              auto g = o.inputs[0]->grad_buffer();
                              for (std::size_t r = 0; r < rows; ++r)
                                for (std::size_t c = 0; c < cols; ++c)
                                  g[r * cols + c] += o.grad[c * rows + r];
                            });
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  if (numel(shape) != x.size())
    throw DimensionError("reshape: " + shape_str(x.shape()) + " to " + shape_str(shape));
  std::vector<T> out(x.data().begin(), x.data().end());
  return Tensor<T>::from_op(std::move(shape), std::move(out), {x.node_ptr()}, [](Node<T>& o) {
    auto g = o.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += o.grad[i];
  });
}

template <typename T>
Tensor<T> repeat_rows(const Tensor<T>& x, std::span<const std::size_t> counts) {
  const bool vector = x.rank() == 1;
  if (!vector) require_rank(x, 2, "repeat_rows");
  const std::size_t rows = vector ? 1 : x.dim(0);
  const std::size_t cols = vector ? x.dim(0) : x.dim(1);
  if (counts.size() != rows)
    throw DimensionError("repeat_rows: " + std::to_string(counts.size()) + " counts for " +
                         std::to_string(rows) + " rows");
  std::size_t total = 0;
  for (auto c : counts) total += c;
  std::vector<T> out(total * cols);
  std::vector<std::size_t> owner(total);
  std::size_t t = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t rep = 0; rep < counts[r]; ++rep, ++t) {
      owner[t] = r;
      std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(r * cols), cols,
                  out.begin() + static_cast<std::ptrdiff_t>(t * cols));
    }
  }
  return Tensor<T>::from_op({total, cols}, std::move(out), {x.node_ptr()},
                            [owner = std::move(owner), cols](Node<T>& o) {
                              auto g = o.inputs[0]->grad_buffer();
                              for (std::size_t t = 0; t < owner.size(); ++t)
                                for (std::size_t c = 0; c < cols; ++c)
                                  g[owner[t] * cols + c] += o.grad[t * cols + c];
                            });
}

template <typename T>
Tensor<T> embedding(const Tensor<T>& table, std::span<const std::size_t> ids) {
  require_rank(table, 2, "embedding");
  const std::size_t vocab = table.dim(0), width = table.dim(1);
  std::vector<std::size_t> rows(ids.begin(), ids.end());
  std::vector<T> out(rows.size() * width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= vocab)
      throw IndexError("embedding: index " + std::to_string(rows[i]) + " outside table of " +
                       std::to_string(vocab) + " rows");
    std::copy_n(table.data().begin() + static_cast<std::ptrdiff_t>(rows[i] * width), width,
                out.begin() + static_cast<std::ptrdiff_t>(i * width));
  }
  return Tensor<T>::from_op({rows.size(), width}, std::move(out), {table.node_ptr()},
                            [rows, width](Node<T>& o) {
                              auto g = o.inputs[0]->grad_buffer();
                              for (std::size_t i = 0; i < rows.size(); ++i)
                                for (std::size_t c = 0; c < width; ++c)
                                  g[rows[i] * width + c] += o.grad[i * width + c];
                            });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary(
      x,
      [](T v) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> abs(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return std::abs(v); },
      [](T v, T) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Tensor<T> log(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return std::log(v); }, [](T v, T) { return T(1) / v; });
}

template <typename T>
Tensor<T> softplus(const Tensor<T>& x) {
  return unary(
      x, [](T v) { return std::max(v, T(0)) + std::log1p(std::exp(-std::abs(v))); },
      [](T v, T) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      });
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
  if (x.rank() == 0 || x.rank() > 2)
    throw DimensionError("softmax: expected a vector or matrix, got " + shape_str(x.shape()));
  const std::size_t cols = x.shape().back();
  const std::size_t rows = x.size() / std::max<std::size_t>(cols, 1);
  std::vector<T> out(x.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = x.data().data() + r * cols;
    T* y = out.data() + r * cols;
    const T peak = *std::max_element(in, in + cols);
    T total = T(0);
    for (std::size_t c = 0; c < cols; ++c) total += (y[c] = std::exp(in[c] - peak));
    for (std::size_t c = 0; c < cols; ++c) y[c] /= total;
  }
  return Tensor<T>::from_op(x.shape(), std::move(out), {x.node_ptr()},
                            [rows, cols](Node<T>& o) {
                              auto g = o.inputs[0]->grad_buffer();
                              for (std::size_t r = 0; r < rows; ++r) {
                                const T* y = o.value.data() + r * cols;
                                const T* dy = o.grad.data() + r * cols;
                                T dot = T(0);
                                for (std::size_t c = 0; c < cols; ++c) dot += dy[c] * y[c];
                                for (std::size_t c = 0; c < cols; ++c)
                                  g[r * cols + c] += y[c] * (dy[c] - dot);
                              }
                            });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
  T total = T(0);
  for (auto v : x.data()) total += v;
  return Tensor<T>::from_op({}, {total}, {x.node_ptr()}, [](Node<T>& o) {
    auto g = o.inputs[0]->grad_buffer();
    for (auto& v : g) v += o.grad[0];
  });
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
  if (x.size() == 0) throw DimensionError("mean of an empty tensor");
  T total = T(0);
  for (auto v : x.data()) total += v;
  const T inv = T(1) / static_cast<T>(x.size());
  return Tensor<T>::from_op({}, {total * inv}, {x.node_ptr()}, [inv](Node<T>& o) {
    auto g = o.inputs[0]->grad_buffer();
    for (auto& v : g) v += o.grad[0] * inv;
  });
}

template <typename T>
Tensor<T> mean_axis(const Tensor<T>& x, std::size_t axis) {
  require_rank(x, 2, "mean_axis");
  if (axis > 1) throw DimensionError("mean_axis: axis must be 0 or 1");
  const std::size_t rows = x.dim(0), cols = x.dim(1);
  const std::size_t reduced = axis == 0 ? rows : cols;
  if (reduced == 0) throw DimensionError("mean_axis over an empty axis");
  const T inv = T(1) / static_cast<T>(reduced);
  const std::size_t kept = axis == 0 ? cols : rows;
  std::vector<T> out(kept, T(0));
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[axis == 0 ? c : r] += x[r * cols + c];
  for (auto& v : out) v *= inv;
  return Tensor<T>::from_op({kept}, std::move(out), {x.node_ptr()},
                            [rows, cols, axis, inv](Node<T>& o) {
                              auto g = o.inputs[0]->grad_buffer();
                              for (std::size_t r = 0; r < rows; ++r)
                                for (std::size_t c = 0; c < cols; ++c)
                                  g[r * cols + c] += o.grad[axis == 0 ? c : r] * inv;
                            });
}

template <typename T>
Tensor<T> pick(const Tensor<T>& x, std::size_t index) {
  if (index >= x.size())
    throw IndexError("pick: index " + std::to_string(index) + " outside " +
                     shape_str(x.shape()));
  return Tensor<T>::from_op({}, {x[index]}, {x.node_ptr()}, [index](Node<T>& o) {
    o.inputs[0]->grad_buffer()[index] += o.grad[0];
  });
}

template <typename T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, const Tensor<T>& targets) {
  require_same(logits, targets, "bce_with_logits");
  const std::size_t n = logits.size();
  if (n == 0) throw DimensionError("bce_with_logits on empty input");
  T total = T(0);
  for (std::size_t i = 0; i < n; ++i) {
    const T x = logits[i], y = targets[i];
    total += std::max(x, T(0)) - x * y + std::log1p(std::exp(-std::abs(x)));
  }
  const T inv = T(1) / static_cast<T>(n);
  return Tensor<T>::from_op({}, {total * inv}, {logits.node_ptr(), targets.node_ptr()},
                            [inv](Node<T>& o) {
                              auto& nl = *o.inputs[0];
                              auto& nt = *o.inputs[1];
                              const T scale = o.grad[0] * inv;
                              if (nl.requires_grad) {
                                auto g = nl.grad_buffer();
                                for (std::size_t i = 0; i < g.size(); ++i) {
                                  const T x = nl.value[i];
                                  const T p = x >= T(0) ? T(1) / (T(1) + std::exp(-x))
                                                        : std::exp(x) / (T(1) + std::exp(x));
                                  g[i] += scale * (p - nt.value[i]);
                                }
                              }
                              if (nt.requires_grad) {
                                auto g = nt.grad_buffer();
                                for (std::size_t i = 0; i < g.size(); ++i)
                                  g[i] -= scale * nl.value[i];
                              }
                            });
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout probability must be in [0, 1)");
  if (!training || p == 0.0) return x;
  const T keep_scale = T(1) / static_cast<T>(1.0 - p);
  std::vector<T> mask(x.size());
  for (auto& m : mask) m = rng.uniform() >= p ? keep_scale : T(0);
  std::vector<T> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * mask[i];
  return Tensor<T>::from_op(x.shape(), std::move(out), {x.node_ptr()},
                            [mask = std::move(mask)](Node<T>& o) {
                              auto g = o.inputs[0]->grad_buffer();
                              for (std::size_t i = 0; i < g.size(); ++i)
                                g[i] += o.grad[i] * mask[i];
                            });
}

template <typename T>
Tensor<T> gradient_reversal(const Tensor<T>& x, T lambda) {
  std::vector<T> out(x.data().begin(), x.data().end());
  return Tensor<T>::from_op(x.shape(), std::move(out), {x.node_ptr()}, [lambda](Node<T>& o) {
    auto g = o.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += -lambda * o.grad[i];
  });
}

#define ASVS_INSTANTIATE_OPS(T)                                                           \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> conv1d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);        \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                             \
  template Tensor<T> scale(const Tensor<T>&, T);                                          \
  template Tensor<T> add_row_bias(const Tensor<T>&, const Tensor<T>&);                    \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, std::size_t);                  \
  template Tensor<T> slice_rows(const Tensor<T>&, std::size_t, std::size_t);              \
  template Tensor<T> slice_cols(const Tensor<T>&, std::size_t, std::size_t);              \
  template Tensor<T> transpose(const Tensor<T>&);                                         \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                    \
  template Tensor<T> repeat_rows(const Tensor<T>&, std::span<const std::size_t>);         \
  template Tensor<T> embedding(const Tensor<T>&, std::span<const std::size_t>);           \
  template Tensor<T> sigmoid(const Tensor<T>&);                                           \
  template Tensor<T> relu(const Tensor<T>&);                                              \
  template Tensor<T> abs(const Tensor<T>&);                                               \
  template Tensor<T> log(const Tensor<T>&);                                               \
  template Tensor<T> softplus(const Tensor<T>&);                                          \
  template Tensor<T> softmax(const Tensor<T>&);                                           \
  template Tensor<T> sum(const Tensor<T>&);                                               \
  template Tensor<T> mean(const Tensor<T>&);                                              \
  template Tensor<T> mean_axis(const Tensor<T>&, std::size_t);                            \
  template Tensor<T> pick(const Tensor<T>&, std::size_t);                                 \
  template Tensor<T> bce_with_logits(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> dropout(const Tensor<T>&, double, bool, Rng&);                       \
  template Tensor<T> gradient_reversal(const Tensor<T>&, T);

ASVS_INSTANTIATE_OPS(float)
ASVS_INSTANTIATE_OPS(double)

#undef ASVS_INSTANTIATE_OPS

}  // namespace asvs
