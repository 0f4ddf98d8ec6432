#include "asvs/spectral_norm.hpp"

#include <cmath>
#include <iostream>

#include "asvs/ops.hpp"

namespace asvs {
namespace {

constexpr double kSigmaFloor = 1e-12;

double normalize(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0.0)
    for (double& x : v) x /= n;
  return n;
}

}  // namespace

template <typename T>
std::vector<T> random_unit_vector(std::size_t rows, Rng& rng) {
  std::vector<double> u(rows);
  for (auto& x : u) x = rng.normal();
  if (normalize(u) == 0.0) u.assign(rows, 1.0 / std::sqrt(static_cast<double>(rows)));
  return std::vector<T>(u.begin(), u.end());
}

template <typename T>
T estimate_top_singular_value(const Tensor<T>& w, SpectralNormState<T>& state, bool update) {
  if (state.frozen) return state.sigma;
  if (w.rank() == 0) throw DimensionError("spectral_normalize: scalar weight");
  const std::size_t rows = w.dim(0);
  const std::size_t cols = w.size() / rows;
  if (!state.u || state.u->size() != rows)
    throw DimensionError("spectral_normalize: state vector does not match weight " +
                         shape_str(w.shape()));
  const auto m = w.data();
  std::vector<double> u(state.u->begin(), state.u->end());
  std::vector<double> v(cols);

  auto right = [&] {  // v = normalize(W^T u)
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) v[c] += static_cast<double>(m[r * cols + c]) * u[r];
    normalize(v);
  };
  auto left = [&] {  // W v, unnormalised
    std::vector<double> wv(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) wv[r] += static_cast<double>(m[r * cols + c]) * v[c];
    return wv;
  };

  const int iterations = update ? std::max(state.power_iterations, 1) : 0;
  for (int it = 0; it < iterations; ++it) {
    right();
    u = left();
    if (normalize(u) == 0.0) break;
  }
  right();
  const auto wv = left();
  double sigma = 0.0;
  for (std::size_t r = 0; r < rows; ++r) sigma += u[r] * wv[r];

  if (update && normalize(u) > 0.0)
    for (std::size_t r = 0; r < rows; ++r) (*state.u)[r] = static_cast<T>(u[r]);
  state.sigma = static_cast<T>(sigma);
  return state.sigma;
}

template <typename T>
Tensor<T> spectral_normalize(const Tensor<T>& w, SpectralNormState<T>& state, bool update) {
  const T sigma = estimate_top_singular_value(w, state, update);
  if (!(std::abs(static_cast<double>(sigma)) >= kSigmaFloor)) {
    if (!state.warned_zero) {
      std::cerr << "warning: spectral_normalize on a (near) zero weight " << shape_str(w.shape())
                << "; leaving it unscaled\n";
      state.warned_zero = true;
    }
    return w;
  }
  return scale(w, T(1) / sigma);
}

template std::vector<float> random_unit_vector<float>(std::size_t, Rng&);
template std::vector<double> random_unit_vector<double>(std::size_t, Rng&);
template float estimate_top_singular_value<float>(const Tensor<float>&, SpectralNormState<float>&,
                                                  bool);
template double estimate_top_singular_value<double>(const Tensor<double>&,
                                                    SpectralNormState<double>&, bool);
template Tensor<float> spectral_normalize<float>(const Tensor<float>&, SpectralNormState<float>&,
                                                 bool);
template Tensor<double> spectral_normalize<double>(const Tensor<double>&,
                                                   SpectralNormState<double>&, bool);

}  // namespace asvs
