#pragma once

#include <vector>

#include "asvs/layers.hpp"
#include "asvs/model_config.hpp"

namespace asvs {

/// Score encoder E(x): linear1 -> linear2 -> GLU block(s) -> linear3, all
/// position-wise except the convolutions inside the GLU blocks.
template <typename T>
class Encoder {
 public:
  Encoder() = default;
  Encoder(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng);

  /// [len x embed_dim] -> [len x embed_dim].
  Tensor<T> operator()(const Tensor<T>& embedded, const Context& ctx);

  const Linear<T>& linear1() const { return linear1_; }
  const Linear<T>& linear2() const { return linear2_; }
  const Linear<T>& linear3() const { return linear3_; }
  std::vector<GluBlock<T>>& glu_blocks() { return glu_; }

 private:
  Linear<T> linear1_, linear2_, linear3_;
  std::vector<GluBlock<T>> glu_;
};

}  // namespace asvs
