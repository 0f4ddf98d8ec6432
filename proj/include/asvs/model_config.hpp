#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace asvs {

/// Layer sizes and architectural switches. Defaults are the published
/// configuration; tests shrink the widths for gradient checks.
struct ModelConfig {
  std::size_t phoneme_vocab = 71;
  std::size_t pitch_vocab = 84;
  std::size_t n_singers = 7;

  std::size_t embed_dim = 384;  // phoneme/pitch embeddings and score encoding E(x)
  std::size_t singer_dim = 64;

  // Encoder: embed_dim -> hidden1 -> hidden2 -> GLU(hidden2) -> embed_dim.
  std::size_t encoder_hidden1 = 256;
  std::size_t encoder_hidden2 = 64;
  std::size_t encoder_glu_blocks = 1;

  // Decoder width is embed_dim + singer_dim (448 by default).
  std::size_t decoder_layers = 6;
  bool attention_before_glu = true;

  std::size_t n_mgc = 60;
  std::size_t n_bap = 5;  // plus one VUV logit

  std::size_t kernel = 3;
  double residual_scale = std::sqrt(0.5);
  double dropout = 0.1;  // inside GLU blocks and after attention

  // Singer classifier: conv(embed_dim -> classifier_channels) x2, linear -> n_singers.
  std::size_t classifier_channels = 128;

  // Random window discriminators.
  std::vector<std::size_t> window_sizes{2, 4};
  std::vector<std::size_t> disc_channels{64, 128, 256, 1};
  std::vector<std::size_t> disc_kernels{3, 3, 3, 1};

  int power_iterations = 1;

  double embedding_init = 0.05;

  std::size_t decoder_dim() const { return embed_dim + singer_dim; }
  std::size_t condition_dim() const { return embed_dim + singer_dim; }
  std::size_t feature_dim() const { return n_mgc + n_bap + 1; }
  std::size_t vuv_index() const { return n_mgc + n_bap; }

  /// Throws ConfigError on inconsistent sizes.
  void validate() const;
};

}  // namespace asvs
