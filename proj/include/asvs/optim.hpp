#pragma once

#include <span>

#include "asvs/parameter.hpp"

namespace asvs {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam update. Every parameter must carry a gradient; the
/// gradients are cleared afterwards.
template <typename T>
void adam_step(std::span<Parameter<T>* const> params, const AdamConfig& cfg);

/// Rescales all gradients so their joint L2 norm is at most max_norm.
/// Returns the norm before clipping. Parameters without gradients are skipped.
template <typename T>
double clip_grad_norm(std::span<Parameter<T>* const> params, double max_norm);

}  // namespace asvs
