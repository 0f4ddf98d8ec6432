#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace asvs {

/// Frames per second at a 15 ms hop.
inline constexpr double kFramePeriodSeconds = 0.015;
/// Longest segment, 10 s at 15 ms per frame.
inline constexpr std::size_t kDefaultMaxFrames = 667;

/// Generator input: one entry per phoneme plus the singer id.
struct ScoreSequence {
  std::vector<std::size_t> phonemes;   // [0, phoneme_vocab)
  std::vector<std::size_t> pitches;    // [0, pitch_vocab), see PitchVocabulary
  std::vector<std::size_t> durations;  // frames per phoneme, each >= 1
  std::size_t singer_id = 0;

  std::size_t size() const { return phonemes.size(); }
  std::size_t total_frames() const;

  /// Checks equal lengths, id ranges, positive durations and the frame budget.
  void validate(std::size_t phoneme_vocab, std::size_t pitch_vocab, std::size_t n_singers,
                std::size_t max_frames = kDefaultMaxFrames) const;
};

/// Contiguous note-pitch ids for MIDI note numbers [midi_offset, midi_offset + size).
struct PitchVocabulary {
  int midi_offset = 21;
  std::size_t size = 84;

  std::size_t from_midi(int midi) const;
  int to_midi(std::size_t id) const;
};

/// Line format: a `singer <id>` header, then `phoneme_id pitch_id duration_frames`
/// per line. A document starting with '{' is read as JSON with keys
/// singer, phonemes, pitches, durations.
ScoreSequence parse_score(const std::string& text);
ScoreSequence read_score(const std::filesystem::path& path);
std::string format_score(const ScoreSequence& seq);
void write_score(const std::filesystem::path& path, const ScoreSequence& seq);

}  // namespace asvs
