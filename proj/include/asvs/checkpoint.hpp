#pragma once

#include <filesystem>
#include <memory>

#include "asvs/trainer.hpp"

namespace asvs {

inline constexpr char kCheckpointMagic[] = "ASVS-CKPT-1";

/// Binary checkpoint: the magic line, a JSON metadata block (training
/// config, step, pitch map), then every parameter of both groups as
/// name, shape, values and Adam state, then the spectral-norm buffers.
void save_checkpoint(const std::filesystem::path& path, const Trainer& trainer);

/// Rebuilds the trainer from the stored config and restores all values.
/// A wrong magic, a truncated file or a name/shape mismatch throws
/// ValidationError.
std::unique_ptr<Trainer> load_checkpoint(const std::filesystem::path& path);

}  // namespace asvs
