#pragma once

#include <cstdint>

#include "asvs/classifier.hpp"
#include "asvs/decoder.hpp"
#include "asvs/encoder.hpp"
#include "asvs/frontend.hpp"
#include "asvs/length_regulator.hpp"
#include "asvs/mrwds.hpp"

namespace asvs {

/// Every intermediate of one generator pass.
template <typename T>
struct GeneratorOutput {
  Tensor<T> encoding;       // E(x), [len x embed_dim]
  Tensor<T> singer;         // [singer_dim]
  Tensor<T> expanded;       // [frames x embed_dim]
  Tensor<T> decoder_input;  // [frames x decoder_dim]
  Tensor<T> condition;      // discriminator condition, [frames x condition_dim]
  Tensor<T> features;       // G(x), [frames x feature_dim]
};

/// Generator (embeddings, encoder, decoder and the optional singer
/// classifier) in one parameter store and the optional discriminators in
/// another, so the two optimizer groups never overlap.
template <typename T>
class AcousticModel {
 public:
  AcousticModel(const ModelConfig& cfg, bool with_classifier, bool with_mrwds,
                std::uint64_t seed);
  AcousticModel(const AcousticModel&) = delete;
  AcousticModel& operator=(const AcousticModel&) = delete;

  GeneratorOutput<T> generate(const ScoreSequence& seq, const Context& ctx);

  const ModelConfig& config() const { return cfg_; }
  bool has_classifier() const { return with_classifier_; }
  bool has_mrwds() const { return with_mrwds_; }

  ParameterStore<T>& generator_store() { return generator_store_; }
  ParameterStore<T>& discriminator_store() { return discriminator_store_; }
  const ParameterStore<T>& generator_store() const { return generator_store_; }
  const ParameterStore<T>& discriminator_store() const { return discriminator_store_; }

  EmbeddingTables<T>& tables() { return tables_; }
  Encoder<T>& encoder() { return encoder_; }
  Decoder<T>& decoder() { return decoder_; }
  SingerClassifier<T>& classifier();
  Mrwds<T>& mrwds();

 private:
  ModelConfig cfg_;
  bool with_classifier_, with_mrwds_;
  ParameterStore<T> generator_store_, discriminator_store_;
  EmbeddingTables<T> tables_;
  Encoder<T> encoder_;
  Decoder<T> decoder_;
  SingerClassifier<T> classifier_;
  Mrwds<T> mrwds_;
};

}  // namespace asvs
