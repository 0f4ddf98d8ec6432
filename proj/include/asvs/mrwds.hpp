#pragma once

#include <optional>
#include <vector>

#include "asvs/layers.hpp"
#include "asvs/model_config.hpp"

namespace asvs {

struct WindowChoice {
  std::size_t offset = 0;
  bool padded = false;  // sequence shorter than the window, zero-padded at the end
};

/// Uniform start frame in [0, total_frames - window]; offset 0 with padding
/// when the sequence is shorter than the window.
WindowChoice sample_window(std::size_t total_frames, std::size_t window, Rng& rng);

/// One random window discriminator. Unconditional: a stack of spectral-norm
/// conv layers (ReLU between them). Conditional: the last layer sees the
/// hidden channels concatenated with the per-frame condition. The final
/// one-channel map is averaged over time into an unbounded logit.
template <typename T>
class RandomWindowDiscriminator {
 public:
  RandomWindowDiscriminator() = default;
  RandomWindowDiscriminator(ParameterStore<T>& store, const std::string& name,
                            const ModelConfig& cfg, std::size_t window, bool conditional,
                            Rng& rng);

  /// features [window x feature_dim], condition [window x condition_dim] iff conditional.
  Tensor<T> operator()(const Tensor<T>& features, const std::optional<Tensor<T>>& condition,
                       const Context& ctx);

  std::size_t window() const { return window_; }
  bool conditional() const { return conditional_; }
  std::vector<Conv1dLayer<T>>& layers() { return layers_; }

 private:
  std::size_t window_ = 0;
  bool conditional_ = false;
  std::size_t condition_dim_ = 0;
  std::vector<Conv1dLayer<T>> layers_;
};

template <typename T>
struct DiscriminatorVerdict {
  std::vector<Tensor<T>> per_disc;  // scalar logits in discriminator order
  Tensor<T> total;                  // left-to-right sum of per_disc
  std::vector<std::size_t> window_offsets;
};

/// All unconditional discriminators (one per window size) followed by all
/// conditional ones: uRWD_2, uRWD_4, cRWD_2, cRWD_4 by default.
template <typename T>
class Mrwds {
 public:
  Mrwds() = default;
  Mrwds(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng);

  /// features [T x feature_dim], condition [T x condition_dim].
  DiscriminatorVerdict<T> operator()(const Tensor<T>& features, const Tensor<T>& condition,
                                     Rng& rng, const Context& ctx);

  std::vector<RandomWindowDiscriminator<T>>& discriminators() { return discs_; }

 private:
  std::vector<RandomWindowDiscriminator<T>> discs_;
};

}  // namespace asvs
