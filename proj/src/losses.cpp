#include "asvs/losses.hpp"

#include "asvs/ops.hpp"

namespace asvs {

template <typename T>
GenerationLoss<T> generation_loss(const Tensor<T>& pred, const Tensor<T>& target,
                                  const ModelConfig& cfg) {
  const std::size_t dims = cfg.feature_dim();
  if (pred.rank() != 2 || pred.dim(1) != dims || pred.shape() != target.shape())
    throw DimensionError("generation loss: prediction " + shape_str(pred.shape()) +
                         " vs target " + shape_str(target.shape()) + ", expected [T x " +
                         std::to_string(dims) + "]");
  if (pred.dim(0) == 0) throw ValidationError("generation loss on zero frames");
  const std::size_t v = cfg.vuv_index();
  for (std::size_t t = 0; t < target.dim(0); ++t) {
    const T flag = target.at(t, v);
    if (flag != T(0) && flag != T(1))
      throw ValidationError("target VUV at frame " + std::to_string(t) + " is " +
                            std::to_string(static_cast<double>(flag)) + ", expected 0 or 1");
  }
  auto diff = abs(sub(pred, target));
  GenerationLoss<T> out;
  out.l1_mgc = mean(slice_cols(diff, 0, cfg.n_mgc));
  out.l1_bap = mean(slice_cols(diff, cfg.n_mgc, v));
  out.ce_vuv = bce_with_logits(slice_cols(pred, v, v + 1), slice_cols(target, v, v + 1));
  out.total = add(add(out.l1_mgc, out.l1_bap), out.ce_vuv);
  return out;
}

template <typename T>
GanLosses<T> gan_losses(const Tensor<T>& d_real, const Tensor<T>& d_fake, bool non_saturating) {
  GanLosses<T> out;
  // -log s(x) = softplus(-x) and -log(1 - s(x)) = softplus(x).
  Tensor<T> fake_term;
  if (d_fake.defined()) {
    fake_term = softplus(d_fake);
    out.generator = non_saturating ? softplus(scale(d_fake, T(-1))) : scale(fake_term, T(-1));
  }
  if (d_real.defined()) {
    auto real_term = softplus(scale(d_real, T(-1)));
    out.discriminator = fake_term.defined() ? add(real_term, fake_term) : real_term;
  } else {
    out.discriminator = fake_term;
  }
  return out;
}

template <typename T>
Tensor<T> total_generator_loss(const Tensor<T>& generation, const Tensor<T>& singer_adv,
                               const Tensor<T>& generator_adv, const LossWeights& w) {
  if (w.generation < 0 || w.singer < 0 || w.adversarial < 0)
    throw ConfigError("loss weights must be non-negative");
  Tensor<T> total;
  auto accumulate = [&](const Tensor<T>& term, double weight) {
    if (!term.defined() || weight == 0.0) return;
    auto weighted = scale(term, static_cast<T>(weight));
    total = total.defined() ? add(total, weighted) : weighted;
  };
  accumulate(generation, w.generation);
  accumulate(singer_adv, w.singer);
  accumulate(generator_adv, w.adversarial);
  return total.defined() ? total : Tensor<T>::scalar(T(0));
}

template GenerationLoss<float> generation_loss(const Tensor<float>&, const Tensor<float>&,
                                               const ModelConfig&);
template GenerationLoss<double> generation_loss(const Tensor<double>&, const Tensor<double>&,
                                                const ModelConfig&);
template GanLosses<float> gan_losses(const Tensor<float>&, const Tensor<float>&, bool);
template GanLosses<double> gan_losses(const Tensor<double>&, const Tensor<double>&, bool);
template Tensor<float> total_generator_loss(const Tensor<float>&, const Tensor<float>&,
                                            const Tensor<float>&, const LossWeights&);
template Tensor<double> total_generator_loss(const Tensor<double>&, const Tensor<double>&,
                                             const Tensor<double>&, const LossWeights&);

}  // namespace asvs
