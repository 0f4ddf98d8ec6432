#include "asvs/score.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "asvs/errors.hpp"

namespace asvs {

std::size_t ScoreSequence::total_frames() const {
  std::size_t n = 0;
  for (auto d : durations) n += d;
  return n;
}

void ScoreSequence::validate(std::size_t phoneme_vocab, std::size_t pitch_vocab,
                             std::size_t n_singers, std::size_t max_frames) const {
  if (phonemes.size() != pitches.size() || phonemes.size() != durations.size())
    throw AlignmentError("score has " + std::to_string(phonemes.size()) + " phonemes, " +
                         std::to_string(pitches.size()) + " pitches and " +
                         std::to_string(durations.size()) + " durations");
  if (phonemes.empty()) throw ValidationError("score has no phonemes");
  for (std::size_t i = 0; i < phonemes.size(); ++i) {
    if (phonemes[i] >= phoneme_vocab)
      throw VocabularyError("phoneme id " + std::to_string(phonemes[i]) + " at position " +
                            std::to_string(i) + " outside vocabulary of " +
                            std::to_string(phoneme_vocab));
    if (pitches[i] >= pitch_vocab)
      throw VocabularyError("pitch id " + std::to_string(pitches[i]) + " at position " +
                            std::to_string(i) + " outside vocabulary of " +
                            std::to_string(pitch_vocab));
    if (durations[i] == 0)
      throw ValidationError("zero duration at position " + std::to_string(i));
  }
  if (singer_id >= n_singers)
    throw VocabularyError("singer id " + std::to_string(singer_id) + " outside " +
                          std::to_string(n_singers) + " singers");
  if (total_frames() > max_frames)
    throw ValidationError("score spans " + std::to_string(total_frames()) +
                          " frames, more than " + std::to_string(max_frames));
}

std::size_t PitchVocabulary::from_midi(int midi) const {
  const int id = midi - midi_offset;
  if (id < 0 || static_cast<std::size_t>(id) >= size)
    throw VocabularyError("MIDI note " + std::to_string(midi) + " outside pitch vocabulary [" +
                          std::to_string(midi_offset) + ", " +
                          std::to_string(midi_offset + static_cast<int>(size)) + ")");
  return static_cast<std::size_t>(id);
}

int PitchVocabulary::to_midi(std::size_t id) const {
  if (id >= size) throw VocabularyError("pitch id " + std::to_string(id) + " outside vocabulary");
  return midi_offset + static_cast<int>(id);
}

namespace {

ScoreSequence parse_json_score(const std::string& text) {
  ScoreSequence seq;
  try {
    const auto doc = nlohmann::json::parse(text);
    seq.singer_id = doc.at("singer").get<std::size_t>();
    seq.phonemes = doc.at("phonemes").get<std::vector<std::size_t>>();
    seq.pitches = doc.at("pitches").get<std::vector<std::size_t>>();
    seq.durations = doc.at("durations").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("score JSON: ") + e.what());
  }
  return seq;
}

}  // namespace

ScoreSequence parse_score(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_json_score(text);

  ScoreSequence seq;
  bool have_header = false;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string head;
    if (!(fields >> head)) continue;
    if (head == "singer") {
      long long id = -1;
      if (!(fields >> id) || id < 0)
        throw ValidationError("score line " + std::to_string(line_no) + ": bad singer header");
      seq.singer_id = static_cast<std::size_t>(id);
      have_header = true;
      continue;
    }
    if (!have_header)
      throw ValidationError("score line " + std::to_string(line_no) +
                            ": expected `singer <id>` header first");
    long long phoneme = -1, pitch = -1, duration = -1;
    std::istringstream row(line);
    std::string extra;
    if (!(row >> phoneme >> pitch >> duration) || (row >> extra) || phoneme < 0 || pitch < 0 ||
        duration < 0)
      throw ValidationError("score line " + std::to_string(line_no) +
                            ": expected `phoneme_id pitch_id duration_frames`");
    seq.phonemes.push_back(static_cast<std::size_t>(phoneme));
    seq.pitches.push_back(static_cast<std::size_t>(pitch));
    seq.durations.push_back(static_cast<std::size_t>(duration));
  }
  if (!have_header) throw ValidationError("score has no `singer <id>` header");
  return seq;
}

ScoreSequence read_score(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open score file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_score(buf.str());
}

std::string format_score(const ScoreSequence& seq) {
  std::ostringstream out;
  out << "singer " << seq.singer_id << '\n';
  for (std::size_t i = 0; i < seq.phonemes.size(); ++i)
    out << seq.phonemes[i] << ' ' << seq.pitches[i] << ' ' << seq.durations[i] << '\n';
  return out.str();
}

void write_score(const std::filesystem::path& path, const ScoreSequence& seq) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write score file " + path.string());
  out << format_score(seq);
}

}  // namespace asvs
