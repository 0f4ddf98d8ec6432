#pragma once

#include "asvs/model_config.hpp"
#include "asvs/tensor.hpp"

namespace asvs {

/// Reconstruction loss and its three parts. Each part is a mean over the
/// frames it is given, so a batch is handled by concatenating its frames.
template <typename T>
struct GenerationLoss {
  Tensor<T> total;
  Tensor<T> l1_mgc;
  Tensor<T> l1_bap;
  Tensor<T> ce_vuv;
};

/// pred/target [T x feature_dim]. Target VUV entries must be exactly 0 or 1.
template <typename T>
GenerationLoss<T> generation_loss(const Tensor<T>& pred, const Tensor<T>& target,
                                  const ModelConfig& cfg);

template <typename T>
struct GanLosses {
  Tensor<T> discriminator;  // -log s(d_real) - log(1 - s(d_fake))
  Tensor<T> generator;      // log(1 - s(d_fake)), or -log s(d_fake) when non-saturating
};

/// Vanilla GAN losses on discriminator logits, written with softplus so
/// large logits stay finite. Either logit may be undefined (then its term is
/// left out, e.g. d_real in a generator step).
template <typename T>
GanLosses<T> gan_losses(const Tensor<T>& d_real, const Tensor<T>& d_fake,
                        bool non_saturating = false);

struct LossWeights {
  double generation = 1.0;  // lambda_G
  double singer = 0.0;      // lambda_S
  double adversarial = 0.0; // lambda_D
};

/// lambda_G * L_G + lambda_S * L_adv_singer + lambda_D * L_adv_G. Terms whose
/// weight is zero are not added to the graph, and undefined components are
/// treated as zero. Negative weights throw ConfigError.
template <typename T>
Tensor<T> total_generator_loss(const Tensor<T>& generation, const Tensor<T>& singer_adv,
                               const Tensor<T>& generator_adv, const LossWeights& weights);

}  // namespace asvs
