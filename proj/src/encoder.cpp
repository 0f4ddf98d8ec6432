#include "asvs/encoder.hpp"

namespace asvs {

template <typename T>
Encoder<T>::Encoder(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng)
    : linear1_(store, "encoder.linear1", cfg.embed_dim, cfg.encoder_hidden1, rng),
      linear2_(store, "encoder.linear2", cfg.encoder_hidden1, cfg.encoder_hidden2, rng),
      linear3_(store, "encoder.linear3", cfg.encoder_hidden2, cfg.embed_dim, rng) {
  for (std::size_t i = 0; i < cfg.encoder_glu_blocks; ++i)
    glu_.emplace_back(store, "encoder.glu" + std::to_string(i), cfg.encoder_hidden2, cfg.kernel,
                      cfg.residual_scale, rng);
}

template <typename T>
Tensor<T> Encoder<T>::operator()(const Tensor<T>& embedded, const Context& ctx) {
  if (embedded.rank() != 2 || embedded.dim(1) != linear1_.in_features())
    throw DimensionError("encoder expects [len x " + std::to_string(linear1_.in_features()) +
                         "], got " + shape_str(embedded.shape()));
  auto h = linear2_(linear1_(embedded));
  auto channels = transpose(h);  // [hidden2 x len]
  for (auto& block : glu_) channels = block(channels, ctx);
  return linear3_(transpose(channels));
}

template class Encoder<float>;
template class Encoder<double>;

}  // namespace asvs
