#pragma once

// Central finite-difference checker. It only ever calls the forward function,
// so it is independent of the backward closures it verifies.

#include <functional>
#include <string>
#include <vector>

#include "asvs/tensor.hpp"

namespace asvs {

struct GradCheckResult {
  std::string name;
  double relative_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  std::size_t checked = 0;      // number of perturbed coordinates
  bool passed = false;
};

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Upper bound on perturbed coordinates per input (evenly strided); 0 = all.
  std::size_t max_coordinates = 0;
};

/// `loss` must rebuild the graph from the current values of `inputs` on every
/// call and return a scalar. Gradients of `inputs` are cleared first.
GradCheckResult check_gradients(const std::string& name,
                                const std::function<Tensor<double>()>& loss,
                                std::vector<Tensor<double>> inputs,
                                const GradCheckOptions& options = {});

}  // namespace asvs
