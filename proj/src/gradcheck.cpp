#include "asvs/gradcheck.hpp"

#include <algorithm>
#include <cmath>

namespace asvs {

GradCheckResult check_gradients(const std::string& name,
                                const std::function<Tensor<double>()>& loss,
                                std::vector<Tensor<double>> inputs,
                                const GradCheckOptions& options) {
  for (auto& in : inputs) in.clear_grad();
  loss().backward();

  double diff_sq = 0.0, analytic_sq = 0.0, numeric_sq = 0.0;
  std::size_t checked = 0;
  for (auto& in : inputs) {
    const std::vector<double> analytic =
        in.has_grad() ? std::vector<double>(in.grad().begin(), in.grad().end())
                      : std::vector<double>(in.size(), 0.0);
    const std::size_t n = in.size();
    const std::size_t stride =
        options.max_coordinates == 0 ? 1 : std::max<std::size_t>(1, n / options.max_coordinates);
    auto values = in.mutable_data();
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = values[i];
      values[i] = saved + options.step;
      const double plus = loss().item();
      values[i] = saved - options.step;
      const double minus = loss().item();
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * options.step);
      diff_sq += (analytic[i] - numeric) * (analytic[i] - numeric);
      analytic_sq += analytic[i] * analytic[i];
      numeric_sq += numeric * numeric;
      ++checked;
    }
    in.clear_grad();
  }
  GradCheckResult result;
  result.name = name;
  result.checked = checked;
  const double denom = std::sqrt(std::max(analytic_sq, numeric_sq));
  result.relative_error = denom > 0.0 ? std::sqrt(diff_sq) / denom : 0.0;
  result.passed = result.relative_error <= options.tolerance;
  return result;
}

}  // namespace asvs
