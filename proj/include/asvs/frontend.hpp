#pragma once

#include "asvs/model_config.hpp"
#include "asvs/parameter.hpp"
#include "asvs/score.hpp"

namespace asvs {

/// Sinusoidal position code: PE[2i] = sin(pos / 10000^(2i/dim)),
/// PE[2i+1] = cos(pos / 10000^(2i/dim)). dim must be even.
template <typename T>
Tensor<T> positional_encoding(std::size_t position, std::size_t dim);

/// Rows 0..length-1 of the position code as a constant [length x dim] tensor.
template <typename T>
Tensor<T> positional_table(std::size_t length, std::size_t dim);

/// Trainable phoneme, pitch and singer lookup tables.
template <typename T>
struct EmbeddingTables {
  Tensor<T> phoneme;  // [phoneme_vocab x embed_dim]
  Tensor<T> pitch;    // [pitch_vocab x embed_dim]
  Tensor<T> singer;   // [n_singers x singer_dim]

  EmbeddingTables() = default;
  EmbeddingTables(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng);
};

/// phoneme_emb[t] + pitch_emb[t] + PE(t): [len x embed_dim].
template <typename T>
Tensor<T> encode_score_input(const ScoreSequence& seq, const EmbeddingTables<T>& tables);

/// Trainable singer row, shape [singer_dim].
template <typename T>
Tensor<T> lookup_singer(std::size_t singer_id, const EmbeddingTables<T>& tables);

}  // namespace asvs
