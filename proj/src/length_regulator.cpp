#include "asvs/length_regulator.hpp"

#include <algorithm>

#include "asvs/frontend.hpp"
#include "asvs/ops.hpp"

namespace asvs {

FrameAlignment::FrameAlignment(std::vector<std::size_t> d) : durations(std::move(d)) {
  for (std::size_t i = 0; i < durations.size(); ++i) {
    if (durations[i] == 0)
      throw ValidationError("phoneme " + std::to_string(i) + " has zero duration");
    total_ += durations[i];
  }
}

std::size_t FrameAlignment::phoneme_of(std::size_t frame) const {
  std::size_t end = 0;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    end += durations[i];
    if (frame < end) return i;
  }
  throw IndexError("frame " + std::to_string(frame) + " beyond " + std::to_string(total_));
}

template <typename T>
Tensor<T> expand(const Tensor<T>& encoding, const FrameAlignment& align) {
  if (encoding.rank() != 2)
    throw DimensionError("expand needs a [len x C] encoding, got " + shape_str(encoding.shape()));
  if (encoding.dim(0) != align.durations.size())
    throw AlignmentError("encoding has " + std::to_string(encoding.dim(0)) + " phonemes but " +
                         std::to_string(align.durations.size()) + " durations");
  return repeat_rows(encoding, align.durations);
}

template <typename T>
Tensor<T> frame_condition(const Tensor<T>& expanded, const Tensor<T>& singer_embedding) {
  if (expanded.rank() != 2 || singer_embedding.rank() != 1)
    throw DimensionError("decoder input needs [T x C] frames and a singer vector, got " +
                         shape_str(expanded.shape()) + " and " +
                         shape_str(singer_embedding.shape()));
  const std::size_t counts[] = {expanded.dim(0)};
  return concat<T>({expanded, repeat_rows(singer_embedding, counts)}, 1);
}

template <typename T>
Tensor<T> assemble_decoder_input(const Tensor<T>& expanded, const Tensor<T>& singer_embedding) {
  auto joined = frame_condition(expanded, singer_embedding);
  return add(joined, positional_table<T>(joined.dim(0), joined.dim(1)));
}

template Tensor<float> expand(const Tensor<float>&, const FrameAlignment&);
template Tensor<double> expand(const Tensor<double>&, const FrameAlignment&);
template Tensor<float> frame_condition(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> frame_condition(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> assemble_decoder_input(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> assemble_decoder_input(const Tensor<double>&, const Tensor<double>&);

}  // namespace asvs
