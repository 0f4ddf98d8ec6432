#include "asvs/layers.hpp"

#include <cmath>

namespace asvs {

template <typename T>
Tensor<T> apply_dropout(const Tensor<T>& x, const Context& ctx) {
  if (!ctx.training || ctx.dropout <= 0.0) return x;
  if (!ctx.rng) throw ConfigError("training-mode dropout needs an rng");
  return dropout(x, ctx.dropout, true, *ctx.rng);
}

template <typename T>
Linear<T>::Linear(ParameterStore<T>& store, const std::string& name, std::size_t in,
                  std::size_t out, Rng& rng) {
  weight_ = store.add_uniform(name + ".weight", {in, out}, 1.0 / std::sqrt(double(in)), rng);
  bias_ = store.add_zeros(name + ".bias", {out});
}

template <typename T>
Tensor<T> Linear<T>::operator()(const Tensor<T>& x) const {
  if (x.rank() != 2 || x.dim(1) != in_features())
    throw DimensionError("linear layer expects [T x " + std::to_string(in_features()) +
                         "], got " + shape_str(x.shape()));
  return add_row_bias(matmul(x, weight_), bias_);
}

template <typename T>
Conv1dLayer<T>::Conv1dLayer(ParameterStore<T>& store, const std::string& name, std::size_t in,
                            std::size_t out, std::size_t kernel, bool spectral_norm,
                            int power_iterations, Rng& rng)
    : spectral_norm_(spectral_norm) {
  if (kernel % 2 == 0)
    throw ConfigError(name + ": kernel size must be odd, got " + std::to_string(kernel));
  weight_ = store.add_uniform(name + ".weight", {out, in, kernel},
                              1.0 / std::sqrt(double(in * kernel)), rng);
  bias_ = store.add_zeros(name + ".bias", {out});
  if (spectral_norm_) {
    sn_state_.u = &store.add_buffer(name + ".sn_u", random_unit_vector<T>(out, rng));
    sn_state_.power_iterations = power_iterations;
  }
}

template <typename T>
Tensor<T> Conv1dLayer<T>::effective_weight(bool update) {
  return spectral_norm_ ? spectral_normalize(weight_, sn_state_, update) : weight_;
}

template <typename T>
void Conv1dLayer<T>::freeze_spectral_norm() {
  if (!spectral_norm_) return;
  sn_state_.frozen = false;
  estimate_top_singular_value(weight_, sn_state_, false);
  sn_state_.frozen = true;
}

template <typename T>
Tensor<T> Conv1dLayer<T>::operator()(const Tensor<T>& x, const Context& ctx) {
  if (x.rank() != 2 || x.dim(0) != weight_.dim(1))
    throw DimensionError("conv layer expects [" + std::to_string(weight_.dim(1)) +
                         " x T], got " + shape_str(x.shape()));
  return conv1d(x, effective_weight(ctx.training), bias_);
}

template <typename T>
GluBlock<T>::GluBlock(ParameterStore<T>& store, const std::string& name, std::size_t channels,
                      std::size_t kernel, double residual_scale, Rng& rng)
    : channels_(channels),
      residual_scale_(residual_scale),
      conv_a_(store, name + ".conv_a", channels, channels, kernel, false, 1, rng),
      conv_b_(store, name + ".conv_b", channels, channels, kernel, false, 1, rng) {}

template <typename T>
Tensor<T> GluBlock<T>::operator()(const Tensor<T>& x, const Context& ctx) {
  if (x.rank() != 2 || x.dim(0) != channels_)
    throw DimensionError("GLU block has " + std::to_string(channels_) +
                         " channels, input is " + shape_str(x.shape()));
  auto gated = mul(conv_a_(x, ctx), sigmoid(conv_b_(x, ctx)));
  gated = apply_dropout(gated, ctx);
  return add(scale(gated, static_cast<T>(residual_scale_)), x);
}

template Tensor<float> apply_dropout(const Tensor<float>&, const Context&);
template Tensor<double> apply_dropout(const Tensor<double>&, const Context&);
template class Linear<float>;
template class Linear<double>;
template class Conv1dLayer<float>;
template class Conv1dLayer<double>;
template class GluBlock<float>;
template class GluBlock<double>;

}  // namespace asvs
