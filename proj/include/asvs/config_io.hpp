#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "asvs/corpus.hpp"
#include "asvs/trainer.hpp"

namespace asvs {

/// Training configuration as JSON. Every field is optional on input and
/// defaults to the TrainConfig default; "system" may be a preset number or
/// an object. Unknown keys and ill-typed values throw ConfigError.
TrainConfig parse_train_config(const std::string& json_text);
TrainConfig load_train_config(const std::filesystem::path& path);

/// Complete, canonical JSON (stable key order) for a configuration.
std::string dump_train_config(const TrainConfig& cfg);

/// FNV-1a 64 of the canonical dump.
std::uint64_t config_hash(const TrainConfig& cfg);

std::string model_config_json(const ModelConfig& cfg);
ModelConfig parse_model_config(const std::string& json_text);

/// Corpus spec as JSON, same rules as the training config.
CorpusSpec parse_corpus_spec(const std::string& json_text);
CorpusSpec load_corpus_spec(const std::filesystem::path& path);

}  // namespace asvs
