#include "asvs/frontend.hpp"

#include <cmath>

#include "asvs/ops.hpp"

namespace asvs {
namespace {

void check_even(std::size_t dim) {
  if (dim == 0 || dim % 2 != 0)
    throw ConfigError("positional encoding needs an even dimension, got " + std::to_string(dim));
}

template <typename T>
void fill_code(std::size_t position, std::size_t dim, T* out) {
  const double pos = static_cast<double>(position);
  for (std::size_t i = 0; i < dim / 2; ++i) {
    const double angle = pos / std::pow(10000.0, static_cast<double>(2 * i) / double(dim));
    out[2 * i] = static_cast<T>(std::sin(angle));
    out[2 * i + 1] = static_cast<T>(std::cos(angle));
  }
}

}  // namespace

template <typename T>
Tensor<T> positional_encoding(std::size_t position, std::size_t dim) {
  check_even(dim);
  std::vector<T> v(dim);
  fill_code(position, dim, v.data());
  return Tensor<T>({dim}, std::move(v));
}

template <typename T>
Tensor<T> positional_table(std::size_t length, std::size_t dim) {
  check_even(dim);
  std::vector<T> v(length * dim);
  for (std::size_t t = 0; t < length; ++t) fill_code(t, dim, v.data() + t * dim);
  return Tensor<T>({length, dim}, std::move(v));
}

template <typename T>
EmbeddingTables<T>::EmbeddingTables(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng) {
  phoneme = store.add_uniform("frontend.phoneme_table", {cfg.phoneme_vocab, cfg.embed_dim},
                              cfg.embedding_init, rng);
  pitch = store.add_uniform("frontend.pitch_table", {cfg.pitch_vocab, cfg.embed_dim},
                            cfg.embedding_init, rng);
  singer = store.add_uniform("frontend.singer_table", {cfg.n_singers, cfg.singer_dim},
                             cfg.embedding_init, rng);
}

template <typename T>
Tensor<T> encode_score_input(const ScoreSequence& seq, const EmbeddingTables<T>& tables) {
  seq.validate(tables.phoneme.dim(0), tables.pitch.dim(0), tables.singer.dim(0),
               static_cast<std::size_t>(-1));
  const std::size_t dim = tables.phoneme.dim(1);
  if (tables.pitch.dim(1) != dim)
    throw DimensionError("phoneme and pitch embeddings differ in width");
  auto summed = add(embedding(tables.phoneme, seq.phonemes), embedding(tables.pitch, seq.pitches));
  return add(summed, positional_table<T>(seq.size(), dim));
}

template <typename T>
Tensor<T> lookup_singer(std::size_t singer_id, const EmbeddingTables<T>& tables) {
  const std::size_t n = tables.singer.dim(0);
  if (singer_id >= n)
    throw VocabularyError("singer id " + std::to_string(singer_id) + " outside " +
                          std::to_string(n) + " singers");
  const std::size_t id[] = {singer_id};
  return reshape(embedding(tables.singer, id), {tables.singer.dim(1)});
}

template Tensor<float> positional_encoding<float>(std::size_t, std::size_t);
template Tensor<double> positional_encoding<double>(std::size_t, std::size_t);
template Tensor<float> positional_table<float>(std::size_t, std::size_t);
template Tensor<double> positional_table<double>(std::size_t, std::size_t);
template struct EmbeddingTables<float>;
template struct EmbeddingTables<double>;
template Tensor<float> encode_score_input(const ScoreSequence&, const EmbeddingTables<float>&);
template Tensor<double> encode_score_input(const ScoreSequence&, const EmbeddingTables<double>&);
template Tensor<float> lookup_singer(std::size_t, const EmbeddingTables<float>&);
template Tensor<double> lookup_singer(std::size_t, const EmbeddingTables<double>&);

}  // namespace asvs
