#include "asvs/optim.hpp"

#include <cmath>

namespace asvs {

template <typename T>
void adam_step(std::span<Parameter<T>* const> params, const AdamConfig& cfg) {
  for (auto* p : params) {
    if (!p->tensor.has_grad())
      throw InvariantError("adam_step: parameter '" + p->name + "' has no gradient");
  }
  for (auto* p : params) {
    ++p->step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(p->step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(p->step));
    auto value = p->tensor.mutable_data();
    const auto grad = p->tensor.grad();
    auto& m = p->first_moment;
    auto& v = p->second_moment;
    const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
    const T a1 = T(1) - b1, a2 = T(1) - b2;
    const T step_size = static_cast<T>(cfg.lr / c1);
    const T inv_c2 = static_cast<T>(1.0 / c2);
    const T eps = static_cast<T>(cfg.epsilon);
    T* __restrict__ vp = value.data();
    T* __restrict__ mp = m.data();
    T* __restrict__ sp = v.data();
    const T* __restrict__ gp = grad.data();
    const std::size_t n = value.size();
#pragma omp parallel for schedule(static) if (n > (1u << 16))
    for (std::size_t i = 0; i < n; ++i) {
      const T g = gp[i];
      mp[i] = b1 * mp[i] + a1 * g;
      sp[i] = b2 * sp[i] + a2 * g * g;
      vp[i] -= step_size * mp[i] / (std::sqrt(sp[i] * inv_c2) + eps);
    }
    p->tensor.clear_grad();
  }
}

template <typename T>
double clip_grad_norm(std::span<Parameter<T>* const> params, double max_norm) {
  double squared = 0.0;
  for (auto* p : params)
    for (auto g : p->tensor.grad()) squared += static_cast<double>(g) * static_cast<double>(g);
  const double norm = std::sqrt(squared);
  if (max_norm > 0.0 && norm > max_norm) {
    const T factor = static_cast<T>(max_norm / norm);
    for (auto* p : params) {
      if (!p->tensor.has_grad()) continue;
      for (auto& g : p->tensor.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

template void adam_step<float>(std::span<Parameter<float>* const>, const AdamConfig&);
template void adam_step<double>(std::span<Parameter<double>* const>, const AdamConfig&);
template double clip_grad_norm<float>(std::span<Parameter<float>* const>, double);
template double clip_grad_norm<double>(std::span<Parameter<double>* const>, double);

}  // namespace asvs
