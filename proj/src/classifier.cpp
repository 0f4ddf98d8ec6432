#include "asvs/classifier.hpp"

namespace asvs {

template <typename T>
SingerClassifier<T>::SingerClassifier(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng)
    : in_channels_(cfg.embed_dim),
      conv1_(store, "classifier.conv1", cfg.embed_dim, cfg.classifier_channels, cfg.kernel, true,
             cfg.power_iterations, rng),
      conv2_(store, "classifier.conv2", cfg.classifier_channels, cfg.classifier_channels,
             cfg.kernel, true, cfg.power_iterations, rng),
      out_(store, "classifier.out_linear", cfg.classifier_channels, cfg.n_singers, rng) {}

template <typename T>
Tensor<T> SingerClassifier<T>::classify(const Tensor<T>& score_encoding, T lambda_grl,
                                        const Context& ctx) {
  if (score_encoding.rank() != 2 || score_encoding.dim(1) != in_channels_)
    throw DimensionError("singer classifier expects [len x " + std::to_string(in_channels_) +
                         "], got " + shape_str(score_encoding.shape()));
  auto reversed = gradient_reversal(score_encoding, lambda_grl);
  auto h = relu(conv1_(transpose(reversed), ctx));
  h = relu(conv2_(h, ctx));
  auto pooled = reshape(mean_axis(h, 1), {1, h.dim(0)});
  auto probs = softmax(out_(pooled));
  return reshape(probs, {classes()});
}

template <typename T>
Tensor<T> singer_adv_loss(std::span<const Tensor<T>> probabilities,
                          std::span<const std::size_t> labels) {
  if (probabilities.size() != labels.size())
    throw ValidationError("singer loss: " + std::to_string(probabilities.size()) +
                          " predictions for " + std::to_string(labels.size()) + " labels");
  if (probabilities.empty()) throw ValidationError("singer loss on an empty batch");
  Tensor<T> total;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= probabilities[i].size())
      throw ValidationError("singer label " + std::to_string(labels[i]) + " outside " +
                            std::to_string(probabilities[i].size()) + " classes");
    // The floor keeps a saturated wrong prediction finite.
    auto p = add(pick(probabilities[i], labels[i]), Tensor<T>::scalar(T(1e-30)));
    auto ce = scale(log(p), T(-1));
    total = total.defined() ? add(total, ce) : ce;
  }
  return total;
}

template class SingerClassifier<float>;
template class SingerClassifier<double>;
template Tensor<float> singer_adv_loss(std::span<const Tensor<float>>,
                                       std::span<const std::size_t>);
template Tensor<double> singer_adv_loss(std::span<const Tensor<double>>,
                                        std::span<const std::size_t>);

}  // namespace asvs
