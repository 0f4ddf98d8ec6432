#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "asvs/score.hpp"

namespace asvs {

/// Shape of the toy multi-singer corpus. Singer 0 plays the target singer.
struct CorpusSpec {
  std::size_t n_singers = 7;
  std::vector<std::size_t> songs_per_singer{200, 200, 200, 210, 205, 200, 153};
  std::size_t min_phonemes = 4;
  std::size_t max_phonemes = 24;
  std::size_t min_duration = 1;
  std::size_t max_duration = 20;
  std::size_t max_frames = kDefaultMaxFrames;
  std::size_t phoneme_vocab = 71;
  std::size_t pitch_vocab = 84;
  std::size_t n_mgc = 60;
  std::size_t n_bap = 5;
  /// 0: every singer draws phonemes and pitches from the same distribution.
  /// 1: singers use disjoint phoneme subsets and disjoint pitch ranges.
  double unbalance = 0.5;
  /// Fraction of each singer's songs held out for evaluation (at least one
  /// song stays in training).
  double eval_fraction = 0.1;
  std::uint64_t seed = 1;

  std::size_t feature_dim() const { return n_mgc + n_bap + 1; }
  std::size_t total_songs() const;

  /// Per-singer counts proportional to the recorded song counts
  /// [200, 200, 200, 210, 205, 200, 153], each at least one.
  static std::vector<std::size_t> scaled_song_counts(double scale);

  /// Throws ConfigError on an inconsistent spec.
  void validate() const;
};

/// One score with its frame-level features, row-major [frames x feature_dim].
struct Utterance {
  std::string id;
  ScoreSequence score;
  std::vector<float> features;
  std::size_t frames = 0;
  bool held_out = false;
};

struct Corpus {
  CorpusSpec spec;
  std::vector<Utterance> utterances;

  std::vector<const Utterance*> training() const;
  std::vector<const Utterance*> evaluation() const;
  std::vector<const Utterance*> of_singer(std::size_t singer) const;
};

/// Deterministic per-singer feature generator: smooth sinusoidal mixtures
/// keyed by singer, phoneme, pitch and position inside the phoneme.
class OracleSingers {
 public:
  OracleSingers(const CorpusSpec& spec);

  /// One feature frame; `phase` is the position inside the phoneme in [0, 1].
  void frame(std::size_t singer, std::size_t phoneme, std::size_t pitch, double phase,
             float* out) const;

  /// Vowel-like phonemes are voiced; the rule depends only on the id.
  static bool voiced(std::size_t phoneme) { return phoneme % 3 != 0; }

  /// Features for a whole score, [total_frames x feature_dim].
  std::vector<float> render(const ScoreSequence& score) const;

 private:
  std::size_t n_mgc_, n_bap_, pitch_vocab_;
  // Per singer, per dimension.
  std::vector<double> offset_, gain_, pitch_amp_, pitch_freq_, pitch_phase_;
  // Per phoneme, per dimension.
  std::vector<double> phoneme_shape_, contour_phase_;
};

/// Generates the corpus; same spec (including seed) gives identical output.
Corpus generate_corpus(const CorpusSpec& spec);

/// Feature file: `frames: T, dims: D` header then T lines of D values.
void write_features(const std::filesystem::path& path, const std::vector<float>& features,
                    std::size_t frames, std::size_t dims);
std::vector<float> read_features(const std::filesystem::path& path, std::size_t& frames,
                                 std::size_t& dims);

/// Writes scores/, features/ and manifest.json under `dir`.
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus);
Corpus read_corpus(const std::filesystem::path& dir);

}  // namespace asvs
