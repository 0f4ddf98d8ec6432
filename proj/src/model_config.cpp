#include "asvs/model_config.hpp"

#include <string>

#include "asvs/errors.hpp"

namespace asvs {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("model config: " + what);
}

}  // namespace

void ModelConfig::validate() const {
  require(phoneme_vocab > 0 && pitch_vocab > 0, "vocabularies must be non-empty");
  require(n_singers > 0, "n_singers must be positive");
  require(embed_dim > 0 && embed_dim % 2 == 0, "embed_dim must be positive and even");
  require(singer_dim > 0, "singer_dim must be positive");
  require(decoder_dim() % 2 == 0, "decoder width must be even for positional encoding");
  require(encoder_hidden1 > 0 && encoder_hidden2 > 0, "encoder widths must be positive");
  require(kernel % 2 == 1, "kernel size must be odd");
  require(n_mgc > 0, "n_mgc must be positive");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
  require(residual_scale > 0.0, "residual_scale must be positive");
  require(classifier_channels > 0, "classifier_channels must be positive");
  require(!window_sizes.empty(), "at least one discriminator window is required");
  for (auto w : window_sizes) require(w > 0, "window sizes must be positive");
  require(!disc_channels.empty() && disc_channels.size() == disc_kernels.size(),
          "discriminator channel and kernel lists must have equal non-zero length");
  require(disc_channels.back() == 1, "the last discriminator layer must have one channel");
  for (auto k : disc_kernels) require(k % 2 == 1, "discriminator kernels must be odd");
  for (auto c : disc_channels) require(c > 0, "discriminator channels must be positive");
  require(power_iterations >= 1, "power_iterations must be at least 1");
  require(embedding_init > 0.0, "embedding_init must be positive");
}

}  // namespace asvs
