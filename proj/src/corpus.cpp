#include "asvs/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "asvs/errors.hpp"
#include "asvs/rng.hpp"

namespace asvs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::uint64_t kOracleStream = 0;

std::string utterance_id(std::size_t singer, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%zu_%04zu", singer, index);
  return buf;
}

std::size_t uniform_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.index(hi - lo + 1));
}

}  // namespace

std::size_t CorpusSpec::total_songs() const {
  std::size_t n = 0;
  for (auto c : songs_per_singer) n += c;
  return n;
}

std::vector<std::size_t> CorpusSpec::scaled_song_counts(double scale) {
  static constexpr std::size_t kRecorded[] = {200, 200, 200, 210, 205, 200, 153};
  std::vector<std::size_t> out;
  for (auto c : kRecorded)
    out.push_back(std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(c * scale))));
  return out;
}

void CorpusSpec::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("corpus spec: " + what);
  };
  require(n_singers > 0, "n_singers must be positive");
  require(songs_per_singer.size() == n_singers, "songs_per_singer needs one entry per singer");
  require(min_phonemes >= 1 && min_phonemes <= max_phonemes, "bad phoneme count range");
  require(min_duration >= 1 && min_duration <= max_duration, "bad duration range");
  require(max_frames >= max_duration, "frame budget shorter than one phoneme");
  require(phoneme_vocab >= n_singers, "need at least one phoneme per singer");
  require(pitch_vocab >= n_singers, "need at least one pitch per singer");
  require(n_mgc > 0, "n_mgc must be positive");
  require(unbalance >= 0.0 && unbalance <= 1.0, "unbalance must lie in [0, 1]");
  require(eval_fraction >= 0.0 && eval_fraction < 1.0, "eval_fraction must lie in [0, 1)");
}

std::vector<const Utterance*> Corpus::training() const {
  std::vector<const Utterance*> out;
  for (const auto& u : utterances)
    if (!u.held_out) out.push_back(&u);
  return out;
}

std::vector<const Utterance*> Corpus::evaluation() const {
  std::vector<const Utterance*> out;
  for (const auto& u : utterances)
    if (u.held_out) out.push_back(&u);
  return out;
}

std::vector<const Utterance*> Corpus::of_singer(std::size_t singer) const {
  std::vector<const Utterance*> out;
  for (const auto& u : utterances)
    if (u.score.singer_id == singer) out.push_back(&u);
  return out;
}

OracleSingers::OracleSingers(const CorpusSpec& spec)
    : n_mgc_(spec.n_mgc), n_bap_(spec.n_bap), pitch_vocab_(spec.pitch_vocab) {
  Rng rng = Rng::stream(spec.seed, kOracleStream);
  const std::size_t dims = n_mgc_ + n_bap_;
  for (std::size_t s = 0; s < spec.n_singers; ++s) {
    for (std::size_t d = 0; d < dims; ++d) {
      offset_.push_back(0.8 * rng.normal());
      gain_.push_back(rng.uniform(0.6, 1.4));
      pitch_amp_.push_back(rng.uniform(0.2, 0.6));
      pitch_freq_.push_back(rng.uniform(0.5, 2.0));
      pitch_phase_.push_back(rng.uniform(0.0, kTwoPi));
    }
  }
  for (std::size_t p = 0; p < spec.phoneme_vocab; ++p) {
    for (std::size_t d = 0; d < dims; ++d) {
      phoneme_shape_.push_back(0.7 * rng.normal());
      contour_phase_.push_back(rng.uniform(0.0, kTwoPi));
    }
  }
}

void OracleSingers::frame(std::size_t singer, std::size_t phoneme, std::size_t pitch,
                          double phase, float* out) const {
  const std::size_t dims = n_mgc_ + n_bap_;
  const double p = static_cast<double>(pitch) / static_cast<double>(pitch_vocab_);
  const bool is_voiced = voiced(phoneme);
  for (std::size_t d = 0; d < dims; ++d) {
    const std::size_t sd = singer * dims + d, pd = phoneme * dims + d;
    double v = offset_[sd] + gain_[sd] * phoneme_shape_[pd] +
               pitch_amp_[sd] * std::sin(kTwoPi * pitch_freq_[sd] * p + pitch_phase_[sd]) +
               0.15 * std::sin(std::numbers::pi * phase + contour_phase_[pd]);
    if (d >= n_mgc_) v = 0.5 * v + (is_voiced ? -0.5 : 0.5);
    out[d] = static_cast<float>(v);
  }
  out[dims] = is_voiced ? 1.0f : 0.0f;
}

std::vector<float> OracleSingers::render(const ScoreSequence& score) const {
  const std::size_t dims = n_mgc_ + n_bap_ + 1;
  std::vector<float> out(score.total_frames() * dims);
  std::size_t t = 0;
  for (std::size_t i = 0; i < score.size(); ++i) {
    const std::size_t dur = score.durations[i];
    for (std::size_t k = 0; k < dur; ++k, ++t) {
      const double phase = (static_cast<double>(k) + 0.5) / static_cast<double>(dur);
      frame(score.singer_id, score.phonemes[i], score.pitches[i], phase, &out[t * dims]);
    }
  }
  return out;
}

namespace {

// Singer s owns phonemes {p : p % n_singers == s} and the s-th band of pitches.
std::size_t draw_phoneme(const CorpusSpec& spec, std::size_t singer, Rng& rng) {
  if (rng.uniform() < spec.unbalance) {
    const std::size_t owned = (spec.phoneme_vocab - singer + spec.n_singers - 1) / spec.n_singers;
    return singer + spec.n_singers * static_cast<std::size_t>(rng.index(owned));
  }
  return static_cast<std::size_t>(rng.index(spec.phoneme_vocab));
}

std::size_t draw_pitch(const CorpusSpec& spec, std::size_t singer, Rng& rng) {
  const std::size_t band = spec.pitch_vocab / spec.n_singers;
  if (rng.uniform() < spec.unbalance)
    return singer * band + static_cast<std::size_t>(rng.index(band));
  // Shared range centred low in the vocabulary, so high notes are rare.
  const double centre = 0.4 * static_cast<double>(spec.pitch_vocab);
  const double spread = 0.15 * static_cast<double>(spec.pitch_vocab);
  const double v = std::round(centre + spread * rng.normal());
  return static_cast<std::size_t>(std::clamp(v, 0.0, double(spec.pitch_vocab - 1)));
}

}  // namespace

Corpus generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  Corpus corpus;
  corpus.spec = spec;
  const OracleSingers oracle(spec);
  std::uint64_t stream = 1;
  for (std::size_t s = 0; s < spec.n_singers; ++s) {
    const std::size_t count = spec.songs_per_singer[s];
    const std::size_t held =
        std::min<std::size_t>(count - std::min<std::size_t>(count, 1),
                              static_cast<std::size_t>(std::lround(spec.eval_fraction * count)));
    for (std::size_t i = 0; i < count; ++i, ++stream) {
      Rng rng = Rng::stream(spec.seed, stream);
      Utterance u;
      u.id = utterance_id(s, i);
      u.score.singer_id = s;
      const std::size_t length = uniform_between(rng, spec.min_phonemes, spec.max_phonemes);
      std::size_t frames = 0;
      for (std::size_t k = 0; k < length; ++k) {
        const std::size_t ph = draw_phoneme(spec, s, rng);
        const std::size_t pitch = draw_pitch(spec, s, rng);
        const std::size_t dur = uniform_between(rng, spec.min_duration, spec.max_duration);
        if (frames + dur > spec.max_frames) break;  // truncate at a phoneme boundary
        u.score.phonemes.push_back(ph);
        u.score.pitches.push_back(pitch);
        u.score.durations.push_back(dur);
        frames += dur;
      }
      u.frames = frames;
      u.features = oracle.render(u.score);
      u.held_out = i >= count - held;
      corpus.utterances.push_back(std::move(u));
    }
  }
  return corpus;
}

void write_features(const std::filesystem::path& path, const std::vector<float>& features,
                    std::size_t frames, std::size_t dims) {
  if (features.size() != frames * dims)
    throw DimensionError("feature buffer holds " + std::to_string(features.size()) +
                         " values, expected " + std::to_string(frames) + "x" +
                         std::to_string(dims));
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "frames: " << frames << ", dims: " << dims << "\n";
  char buf[32];
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t d = 0; d < dims; ++d) {
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(features[t * dims + d]));
      out << (d ? " " : "") << buf;
    }
    out << "\n";
  }
}

std::vector<float> read_features(const std::filesystem::path& path, std::size_t& frames,
                                 std::size_t& dims) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::string header;
  std::getline(in, header);
  if (std::sscanf(header.c_str(), "frames: %zu, dims: %zu", &frames, &dims) != 2)
    throw ValidationError(path.string() + ": expected a `frames: T, dims: D` header");
  std::vector<float> out(frames * dims);
  for (auto& v : out)
    if (!(in >> v)) throw ValidationError(path.string() + ": fewer values than the header says");
  return out;
}

void write_corpus(const std::filesystem::path& dir, const Corpus& corpus) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "scores");
  fs::create_directories(dir / "features");
  const auto& spec = corpus.spec;
  nlohmann::json manifest;
  manifest["format"] = "asvs-corpus-1";
  manifest["spec"] = {{"n_singers", spec.n_singers},
                      {"songs_per_singer", spec.songs_per_singer},
                      {"min_phonemes", spec.min_phonemes},
                      {"max_phonemes", spec.max_phonemes},
                      {"min_duration", spec.min_duration},
                      {"max_duration", spec.max_duration},
                      {"max_frames", spec.max_frames},
                      {"phoneme_vocab", spec.phoneme_vocab},
                      {"pitch_vocab", spec.pitch_vocab},
                      {"n_mgc", spec.n_mgc},
                      {"n_bap", spec.n_bap},
                      {"unbalance", spec.unbalance},
                      {"eval_fraction", spec.eval_fraction},
                      {"seed", spec.seed}};
  auto& list = manifest["utterances"] = nlohmann::json::array();
  for (const auto& u : corpus.utterances) {
    const std::string score_rel = "scores/" + u.id + ".score";
    const std::string feat_rel = "features/" + u.id + ".feat";
    write_score(dir / score_rel, u.score);
    write_features(dir / feat_rel, u.features, u.frames, spec.feature_dim());
    list.push_back({{"id", u.id},
                    {"singer", u.score.singer_id},
                    {"score", score_rel},
                    {"features", feat_rel},
                    {"frames", u.frames},
                    {"split", u.held_out ? "eval" : "train"}});
  }
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
}

Corpus read_corpus(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw ConfigError("no manifest.json in " + dir.string());
  Corpus corpus;
  try {
    const auto manifest = nlohmann::json::parse(in);
    const auto& s = manifest.at("spec");
    auto& spec = corpus.spec;
    spec.n_singers = s.at("n_singers");
    spec.songs_per_singer = s.at("songs_per_singer").get<std::vector<std::size_t>>();
    spec.min_phonemes = s.at("min_phonemes");
    spec.max_phonemes = s.at("max_phonemes");
    spec.min_duration = s.at("min_duration");
    spec.max_duration = s.at("max_duration");
    spec.max_frames = s.at("max_frames");
    spec.phoneme_vocab = s.at("phoneme_vocab");
    spec.pitch_vocab = s.at("pitch_vocab");
    spec.n_mgc = s.at("n_mgc");
    spec.n_bap = s.at("n_bap");
    spec.unbalance = s.at("unbalance");
    spec.eval_fraction = s.at("eval_fraction");
    spec.seed = s.at("seed");
    for (const auto& entry : manifest.at("utterances")) {
      Utterance u;
      u.id = entry.at("id");
      u.score = read_score(dir / entry.at("score").get<std::string>());
      std::size_t dims = 0;
      u.features = read_features(dir / entry.at("features").get<std::string>(), u.frames, dims);
      if (dims != spec.feature_dim())
        throw ValidationError(u.id + ": feature files have " + std::to_string(dims) +
                              " dims, manifest expects " + std::to_string(spec.feature_dim()));
      if (u.frames != u.score.total_frames())
        throw AlignmentError(u.id + ": " + std::to_string(u.frames) +
                             " feature frames but durations sum to " +
                             std::to_string(u.score.total_frames()));
      u.held_out = entry.at("split") == "eval";
      corpus.utterances.push_back(std::move(u));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("corpus manifest: ") + e.what());
  }
  return corpus;
}

}  // namespace asvs
