#pragma once

#include <span>
#include <vector>

#include "asvs/layers.hpp"
#include "asvs/model_config.hpp"

namespace asvs {

/// Adversarial singer classifier S behind a gradient reversal layer:
/// GRL -> conv1 (SN, ReLU) -> conv2 (SN, ReLU) -> mean over time -> linear -> softmax.
template <typename T>
class SingerClassifier {
 public:
  SingerClassifier() = default;
  SingerClassifier(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng);

  /// Phoneme-level score encoding [len x embed_dim] -> class probabilities [n_singers].
  Tensor<T> classify(const Tensor<T>& score_encoding, T lambda_grl, const Context& ctx);

  Conv1dLayer<T>& conv1() { return conv1_; }
  Conv1dLayer<T>& conv2() { return conv2_; }
  const Linear<T>& out_linear() const { return out_; }
  std::size_t classes() const { return out_.out_features(); }

 private:
  std::size_t in_channels_ = 0;
  Conv1dLayer<T> conv1_, conv2_;
  Linear<T> out_;
};

/// Sum over the batch of -log p_i[label_i].
template <typename T>
Tensor<T> singer_adv_loss(std::span<const Tensor<T>> probabilities,
                          std::span<const std::size_t> labels);

}  // namespace asvs
