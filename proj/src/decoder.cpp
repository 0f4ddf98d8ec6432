#include "asvs/decoder.hpp"

#include <cmath>

namespace asvs {

template <typename T>
SelfAttention<T>::SelfAttention(ParameterStore<T>& store, const std::string& name,
                                std::size_t channels, Rng& rng)
    : channels_(channels),
      q_(store, name + ".query", channels, channels, rng),
      k_(store, name + ".key", channels, channels, rng),
      v_(store, name + ".value", channels, channels, rng),
      o_(store, name + ".output", channels, channels, rng) {}

template <typename T>
Tensor<T> SelfAttention<T>::operator()(const Tensor<T>& x, const Context& ctx) {
  if (x.rank() != 2 || x.dim(1) != channels_)
    throw DimensionError("attention expects [T x " + std::to_string(channels_) + "], got " +
                         shape_str(x.shape()));
  const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(channels_)));
  auto scores = scale(matmul(q_(x), transpose(k_(x))), inv_sqrt);
  last_weights_ = softmax(scores);
  auto attended = o_(matmul(last_weights_, v_(x)));
  return add(x, apply_dropout(attended, ctx));
}

template <typename T>
Decoder<T>::Decoder(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng)
    : width_(cfg.decoder_dim()), attention_first_(cfg.attention_before_glu) {
  for (std::size_t i = 0; i < cfg.decoder_layers; ++i) {
    const std::string name = "decoder.layer" + std::to_string(i);
    Layer layer;
    layer.attention = SelfAttention<T>(store, name + ".attention", width_, rng);
    layer.glu = GluBlock<T>(store, name + ".glu", width_, cfg.kernel, cfg.residual_scale, rng);
    layers_.push_back(std::move(layer));
  }
  out_ = Linear<T>(store, "decoder.out_linear", width_, cfg.feature_dim(), rng);
}

template <typename T>
Tensor<T> Decoder<T>::operator()(const Tensor<T>& input, const Context& ctx) {
  if (input.rank() != 2 || input.dim(1) != width_)
    throw DimensionError("decoder expects [T x " + std::to_string(width_) + "], got " +
                         shape_str(input.shape()));
  auto h = input;
  for (auto& layer : layers_) {
    if (attention_first_) {
      h = layer.attention(h, ctx);
      h = transpose(layer.glu(transpose(h), ctx));
    } else {
      h = transpose(layer.glu(transpose(h), ctx));
      h = layer.attention(h, ctx);
    }
  }
  return out_(h);
}

template class SelfAttention<float>;
template class SelfAttention<double>;
template class Decoder<float>;
template class Decoder<double>;

}  // namespace asvs
