#pragma once

#include <vector>

#include "asvs/tensor.hpp"

namespace asvs {

/// Frames per phoneme; every duration is at least one frame.
struct FrameAlignment {
  std::vector<std::size_t> durations;

  explicit FrameAlignment(std::vector<std::size_t> d);
  std::size_t total_frames() const { return total_; }
  /// Phoneme index that owns frame t.
  std::size_t phoneme_of(std::size_t frame) const;

 private:
  std::size_t total_ = 0;
};

/// Repeats row i of the phoneme-level encoding durations[i] times.
template <typename T>
Tensor<T> expand(const Tensor<T>& encoding, const FrameAlignment& align);

/// Per frame: concat(expanded[t], singer) + PE(t, width): [T x (enc + singer)].
template <typename T>
Tensor<T> assemble_decoder_input(const Tensor<T>& expanded, const Tensor<T>& singer_embedding);

/// concat(expanded[t], singer) without the position code; the discriminator
/// condition.
template <typename T>
Tensor<T> frame_condition(const Tensor<T>& expanded, const Tensor<T>& singer_embedding);

}  // namespace asvs
