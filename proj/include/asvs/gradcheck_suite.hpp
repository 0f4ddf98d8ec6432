#pragma once

#include <cstdint>
#include <vector>

#include "asvs/gradcheck.hpp"
#include "asvs/model_config.hpp"

namespace asvs {

/// A scaled-down architecture whose tensors stay within 8 x 16, so every
/// parameter can be perturbed in a gradient check.
ModelConfig gradcheck_model_config();

/// Finite-difference checks (double precision, central step 1e-5) of every
/// differentiable primitive on randomised small shapes.
std::vector<GradCheckResult> primitive_gradchecks(std::uint64_t seed,
                                                  const GradCheckOptions& options = {});

/// The same for the composite blocks: GLU, attention, encoder, decoder,
/// singer classifier, each random window discriminator, the front end and
/// length regulator, and the loss functions. Spectral-norm sigmas are frozen
/// at their current estimate first.
std::vector<GradCheckResult> composite_gradchecks(std::uint64_t seed,
                                                  const GradCheckOptions& options = {});

}  // namespace asvs
