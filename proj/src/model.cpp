#include "asvs/model.hpp"

namespace asvs {

namespace {
// Each module draws its initial weights from its own stream, so enabling the
// classifier or the discriminators leaves the shared modules untouched.
enum Stream : std::uint64_t { kTables = 1, kEncoder, kDecoder, kClassifier, kMrwds };
}  // namespace

template <typename T>
AcousticModel<T>::AcousticModel(const ModelConfig& cfg, bool with_classifier, bool with_mrwds,
                                std::uint64_t seed)
    : cfg_(cfg), with_classifier_(with_classifier), with_mrwds_(with_mrwds) {
  cfg_.validate();
  Rng tables_rng = Rng::stream(seed, kTables), encoder_rng = Rng::stream(seed, kEncoder),
      decoder_rng = Rng::stream(seed, kDecoder);
  tables_ = EmbeddingTables<T>(generator_store_, cfg_, tables_rng);
  encoder_ = Encoder<T>(generator_store_, cfg_, encoder_rng);
  decoder_ = Decoder<T>(generator_store_, cfg_, decoder_rng);
  if (with_classifier_) {
    Rng rng = Rng::stream(seed, kClassifier);
    classifier_ = SingerClassifier<T>(generator_store_, cfg_, rng);
  }
  if (with_mrwds_) {
    Rng rng = Rng::stream(seed, kMrwds);
    mrwds_ = Mrwds<T>(discriminator_store_, cfg_, rng);
  }
}

template <typename T>
GeneratorOutput<T> AcousticModel<T>::generate(const ScoreSequence& seq, const Context& ctx) {
  GeneratorOutput<T> out;
  out.encoding = encoder_(encode_score_input(seq, tables_), ctx);
  out.singer = lookup_singer(seq.singer_id, tables_);
  out.expanded = expand(out.encoding, FrameAlignment(seq.durations));
  out.condition = frame_condition(out.expanded, out.singer);
  out.decoder_input = add(out.condition, positional_table<T>(out.condition.dim(0),
                                                             out.condition.dim(1)));
  out.features = decoder_(out.decoder_input, ctx);
  return out;
}

template <typename T>
SingerClassifier<T>& AcousticModel<T>::classifier() {
  if (!with_classifier_) throw ConfigError("this model has no singer classifier");
  return classifier_;
}

template <typename T>
Mrwds<T>& AcousticModel<T>::mrwds() {
  if (!with_mrwds_) throw ConfigError("this model has no discriminators");
  return mrwds_;
}

template class AcousticModel<float>;
template class AcousticModel<double>;

}  // namespace asvs
