#include "asvs/mrwds.hpp"

namespace asvs {

WindowChoice sample_window(std::size_t total_frames, std::size_t window, Rng& rng) {
  if (window == 0) throw ConfigError("window size must be positive");
  if (total_frames < window) return {0, true};
  return {static_cast<std::size_t>(rng.index(total_frames - window + 1)), false};
}

template <typename T>
RandomWindowDiscriminator<T>::RandomWindowDiscriminator(ParameterStore<T>& store,
                                                        const std::string& name,
                                                        const ModelConfig& cfg,
                                                        std::size_t window, bool conditional,
                                                        Rng& rng)
    : window_(window), conditional_(conditional), condition_dim_(cfg.condition_dim()) {
  if (cfg.disc_channels.size() != cfg.disc_kernels.size() || cfg.disc_channels.empty())
    throw ConfigError("discriminator channel and kernel plans differ in length");
  std::size_t in = cfg.feature_dim();
  for (std::size_t i = 0; i < cfg.disc_channels.size(); ++i) {
    const bool last = i + 1 == cfg.disc_channels.size();
    const std::size_t layer_in = (last && conditional_) ? in + condition_dim_ : in;
    layers_.emplace_back(store, name + ".layer" + std::to_string(i), layer_in,
                         cfg.disc_channels[i], cfg.disc_kernels[i], true, cfg.power_iterations,
                         rng);
    in = cfg.disc_channels[i];
  }
}

template <typename T>
Tensor<T> RandomWindowDiscriminator<T>::operator()(const Tensor<T>& features,
                                                   const std::optional<Tensor<T>>& condition,
                                                   const Context& ctx) {
  if (condition.has_value() != conditional_)
    throw ConfigError(conditional_ ? "conditional discriminator called without a condition"
                                   : "condition supplied to an unconditional discriminator");
  if (features.rank() != 2 || features.dim(0) != window_)
    throw DimensionError("discriminator window is " + std::to_string(window_) + " frames, got " +
                         shape_str(features.shape()));
  if (condition && condition->shape() != Shape{window_, condition_dim_})
    throw DimensionError("discriminator condition " + shape_str(condition->shape()) +
                         ", expected [" + std::to_string(window_) + "x" +
                         std::to_string(condition_dim_) + "]");
  auto h = transpose(features);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const bool last = i + 1 == layers_.size();
    if (last && conditional_) h = concat<T>({h, transpose(*condition)}, 0);
    h = layers_[i](h, ctx);
    if (!last) h = relu(h);
  }
  return mean(h);
}

namespace {

template <typename T>
Tensor<T> take_window(const Tensor<T>& x, const WindowChoice& choice, std::size_t window) {
  if (!choice.padded) return slice_rows(x, choice.offset, choice.offset + window);
  const std::size_t missing = window - x.dim(0);
  return concat<T>({x, Tensor<T>::zeros({missing, x.dim(1)})}, 0);
}

}  // namespace

template <typename T>
Mrwds<T>::Mrwds(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng) {
  for (bool conditional : {false, true})
    for (std::size_t w : cfg.window_sizes)
      discs_.emplace_back(store,
                          std::string("mrwds.") + (conditional ? "crwd" : "urwd") +
                              std::to_string(w),
                          cfg, w, conditional, rng);
}

template <typename T>
DiscriminatorVerdict<T> Mrwds<T>::operator()(const Tensor<T>& features,
                                             const Tensor<T>& condition, Rng& rng,
                                             const Context& ctx) {
  if (features.rank() != 2 || condition.rank() != 2 || features.dim(0) != condition.dim(0))
    throw AlignmentError("features " + shape_str(features.shape()) + " and condition " +
                         shape_str(condition.shape()) + " are not frame-aligned");
  DiscriminatorVerdict<T> verdict;
  for (auto& disc : discs_) {
    const auto choice = sample_window(features.dim(0), disc.window(), rng);
    verdict.window_offsets.push_back(choice.offset);
    auto window = take_window(features, choice, disc.window());
    std::optional<Tensor<T>> cond;
    if (disc.conditional()) cond = take_window(condition, choice, disc.window());
    auto score = disc(window, cond, ctx);
    verdict.total = verdict.total.defined() ? add(verdict.total, score) : score;
    verdict.per_disc.push_back(std::move(score));
  }
  return verdict;
}

template class RandomWindowDiscriminator<float>;
template class RandomWindowDiscriminator<double>;
template class Mrwds<float>;
template class Mrwds<double>;

}  // namespace asvs
