#pragma once

#include <string>

#include "asvs/ops.hpp"
#include "asvs/parameter.hpp"
#include "asvs/spectral_norm.hpp"

namespace asvs {

/// Per-call mode: training enables dropout (which then needs an rng) and
/// spectral-norm power iterations.
struct Context {
  bool training = false;
  Rng* rng = nullptr;
  double dropout = 0.0;

  static Context eval() { return {}; }
  static Context train(Rng& rng, double dropout) { return {true, &rng, dropout}; }
};

template <typename T>
Tensor<T> apply_dropout(const Tensor<T>& x, const Context& ctx);

/// Position-wise affine map on time-major input: [T x in] -> [T x out].
template <typename T>
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t out,
         Rng& rng);

  Tensor<T> operator()(const Tensor<T>& x) const;

  const Tensor<T>& weight() const { return weight_; }  // [in x out]
  const Tensor<T>& bias() const { return bias_; }      // [out]
  std::size_t in_features() const { return weight_.dim(0); }
  std::size_t out_features() const { return weight_.dim(1); }

 private:
  Tensor<T> weight_;
  Tensor<T> bias_;
};

/// Same-padded 1-D convolution on channel-major input, optionally
/// spectral-normalised: [in x T] -> [out x T].
template <typename T>
class Conv1dLayer {
 public:
  Conv1dLayer() = default;
  Conv1dLayer(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t out,
              std::size_t kernel, bool spectral_norm, int power_iterations, Rng& rng);

  Tensor<T> operator()(const Tensor<T>& x, const Context& ctx);

  /// The weight actually used in the convolution (w / sigma when normalised).
  Tensor<T> effective_weight(bool update);

  /// Fixes sigma at its current estimate (no power iteration), so the
  /// normalised weight is exactly linear in w; used by gradient checks.
  void freeze_spectral_norm();

  const Tensor<T>& weight() const { return weight_; }  // [out x in x kernel]
  const Tensor<T>& bias() const { return bias_; }
  bool spectral_norm() const { return spectral_norm_; }
  SpectralNormState<T>& sn_state() { return sn_state_; }

 private:
  Tensor<T> weight_;
  Tensor<T> bias_;
  bool spectral_norm_ = false;
  SpectralNormState<T> sn_state_;
};

/// Gated linear unit block on [C x T]:
/// y = dropout(conv_a(x) * sigmoid(conv_b(x))) * residual_scale + x.
template <typename T>
class GluBlock {
 public:
  GluBlock() = default;
  GluBlock(ParameterStore<T>& store, const std::string& name, std::size_t channels,
           std::size_t kernel, double residual_scale, Rng& rng);

  Tensor<T> operator()(const Tensor<T>& x, const Context& ctx);

  std::size_t channels() const { return channels_; }
  Conv1dLayer<T>& conv_a() { return conv_a_; }
  Conv1dLayer<T>& conv_b() { return conv_b_; }
  double residual_scale() const { return residual_scale_; }

 private:
  std::size_t channels_ = 0;
  double residual_scale_ = 1.0;
  Conv1dLayer<T> conv_a_;
  Conv1dLayer<T> conv_b_;
};

}  // namespace asvs
