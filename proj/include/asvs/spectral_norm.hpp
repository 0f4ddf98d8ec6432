#pragma once

#include <cstddef>
#include <vector>

#include "asvs/rng.hpp"
#include "asvs/tensor.hpp"

namespace asvs {

/// Persistent left-singular-vector estimate for one weight. `u` lives in the
/// owning ParameterStore as a buffer so it is checkpointed with the weights.
template <typename T>
struct SpectralNormState {
  std::vector<T>* u = nullptr;
  int power_iterations = 1;
  /// Last estimate. While `frozen` is set it is reused verbatim, which makes
  /// the normalised weight an exact linear function of w (gradient checks).
  T sigma = T(0);
  bool frozen = false;
  bool warned_zero = false;
};

/// Random unit vector of length `rows`, the usual starting point for u.
template <typename T>
std::vector<T> random_unit_vector(std::size_t rows, Rng& rng);

/// Power-iteration estimate of the top singular value of `w` viewed as
/// [dim(0) x rest]. With update == true the state runs its power iterations
/// and stores the new u; otherwise the stored u is used as is.
template <typename T>
T estimate_top_singular_value(const Tensor<T>& w, SpectralNormState<T>& state, bool update);

/// w / sigma_hat, with sigma_hat held constant in the backward pass.
/// An all-zero weight (sigma_hat < 1e-12) is returned unscaled.
template <typename T>
Tensor<T> spectral_normalize(const Tensor<T>& w, SpectralNormState<T>& state, bool update = true);

}  // namespace asvs
