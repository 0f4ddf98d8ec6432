#pragma once

#include <vector>

#include "asvs/layers.hpp"
#include "asvs/model_config.hpp"

namespace asvs {

/// Single-head, unmasked self-attention with a residual connection:
/// y = x + dropout(softmax(Q K^T / sqrt(C)) V W_o + b_o).
template <typename T>
class SelfAttention {
 public:
  SelfAttention() = default;
  SelfAttention(ParameterStore<T>& store, const std::string& name, std::size_t channels,
                Rng& rng);

  Tensor<T> operator()(const Tensor<T>& x, const Context& ctx);

  /// Attention weights [T x T] of the last call.
  const Tensor<T>& last_weights() const { return last_weights_; }

  Linear<T>& query() { return q_; }
  Linear<T>& key() { return k_; }
  Linear<T>& value() { return v_; }
  Linear<T>& output() { return o_; }

 private:
  std::size_t channels_ = 0;
  Linear<T> q_, k_, v_, o_;
  Tensor<T> last_weights_;
};

/// Output layout of a frame: [0, n_mgc) MGC, [n_mgc, n_mgc + n_bap) BAP,
/// last column the VUV logit.
template <typename T>
class Decoder {
 public:
  struct Layer {
    SelfAttention<T> attention;
    GluBlock<T> glu;
  };

  Decoder() = default;
  Decoder(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng);

  /// [T x decoder_dim] -> [T x feature_dim].
  Tensor<T> operator()(const Tensor<T>& input, const Context& ctx);

  std::vector<Layer>& layers() { return layers_; }
  const Linear<T>& out_linear() const { return out_; }
  std::size_t width() const { return width_; }

 private:
  std::size_t width_ = 0;
  bool attention_first_ = true;
  std::vector<Layer> layers_;
  Linear<T> out_;
};

}  // namespace asvs
