#include "asvs/gradcheck_suite.hpp"

#include <cmath>
#include <functional>

#include "asvs/classifier.hpp"
#include "asvs/decoder.hpp"
#include "asvs/encoder.hpp"
#include "asvs/frontend.hpp"
#include "asvs/length_regulator.hpp"
#include "asvs/losses.hpp"
#include "asvs/mrwds.hpp"

namespace asvs {

namespace {

using Td = Tensor<double>;

Td random(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0, bool grad = true) {
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = rng.uniform(lo, hi);
  return Td(std::move(shape), std::move(v), grad);
}

// Magnitudes in [0.1, 1) with random sign, clear of the kinks of relu and abs.
Td away_from_zero(Shape shape, Rng& rng) {
  std::vector<double> v(numel(shape));
  for (auto& x : v) {
    const double m = rng.uniform(0.1, 1.0);
    x = rng.uniform() < 0.5 ? -m : m;
  }
  return Td(std::move(shape), std::move(v), true);
}

// sum(x * probe) with a fixed random probe, so no gradient is trivially uniform.
struct Projector {
  Rng rng;
  std::vector<Td> probes;
  std::size_t next = 0;
  Td operator()(const Td& x) {
    if (next == probes.size()) probes.push_back(random(x.shape(), rng, -1, 1, false));
    const Td& p = probes[next++];
    if (p.shape() != x.shape()) throw DimensionError("projector reused with another shape");
    return sum(mul(x, p));
  }
  void reset() { next = 0; }
};

std::vector<Td> tensors_of(ParameterStore<double>& store) {
  std::vector<Td> out;
  for (auto* p : store.parameters()) out.push_back(p->tensor);
  return out;
}

std::vector<Td> with(std::vector<Td> a, const std::vector<Td>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// For a loss whose path from `input` crosses a gradient reversal layer the
// analytic gradient must equal -lambda times the finite-difference gradient
// of the (identity-forward) loss.
GradCheckResult reversed_check(const std::string& name, const std::function<Td()>& loss,
                               Td input, double lambda, const GradCheckOptions& opt) {
  input.clear_grad();
  loss().backward();
  const std::vector<double> analytic(input.grad().begin(), input.grad().end());
  input.clear_grad();
  auto values = input.mutable_data();
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double saved = values[i];
    values[i] = saved + opt.step;
    const double up = loss().item();
    values[i] = saved - opt.step;
    const double down = loss().item();
    values[i] = saved;
    const double expected = -lambda * (up - down) / (2 * opt.step);
    diff += (analytic[i] - expected) * (analytic[i] - expected);
    na += analytic[i] * analytic[i];
    nn += expected * expected;
  }
  GradCheckResult r;
  r.name = name;
  r.checked = values.size();
  const double denom = std::sqrt(std::max(na, nn));
  r.relative_error = denom > 0 ? std::sqrt(diff) / denom : std::sqrt(diff);
  r.passed = r.relative_error <= opt.tolerance;
  return r;
}

}  // namespace

ModelConfig gradcheck_model_config() {
  ModelConfig m;
  m.phoneme_vocab = 6;
  m.pitch_vocab = 5;
  m.n_singers = 3;
  m.embed_dim = 8;
  m.singer_dim = 4;
  m.encoder_hidden1 = 6;
  m.encoder_hidden2 = 4;
  m.decoder_layers = 2;
  m.n_mgc = 3;
  m.n_bap = 2;
  m.classifier_channels = 5;
  m.disc_channels = {4, 6, 8, 1};
  m.dropout = 0.0;
  return m;
}

std::vector<GradCheckResult> primitive_gradchecks(std::uint64_t seed,
                                                  const GradCheckOptions& opt) {
  Rng rng(seed);
  std::vector<GradCheckResult> out;
  const std::size_t r = 2 + rng.index(7), c = 2 + rng.index(15);  // up to 8 x 16
  auto a = away_from_zero({r, c}, rng);
  auto b = random({r, c}, rng);
  auto pos = random({r, c}, rng, 0.5, 2.0);
  auto bias = random({c}, rng);
  Projector weigh{rng.fork(1), {}, 0};
  auto run = [&](const char* name, auto&& f, std::vector<Td> inputs) {
    weigh.probes.clear();
    out.push_back(check_gradients(name, [&] { weigh.reset(); return f(); }, inputs, opt));
  };

  const std::size_t k = 2 + rng.index(5), n = 2 + rng.index(7);
  auto ma = random({r, k}, rng), mb = random({k, n}, rng);
  run("matmul", [&] { return weigh(matmul(ma, mb)); }, {ma, mb});
  auto cx = random({3, 2 + rng.index(7)}, rng), cw = random({2, 3, 3}, rng),
       cb = random({2}, rng);
  run("conv1d", [&] { return weigh(conv1d(cx, cw, cb)); }, {cx, cw, cb});
  run("add", [&] { return weigh(add(a, b)); }, {a, b});
  run("sub", [&] { return weigh(sub(a, b)); }, {a, b});
  run("mul", [&] { return weigh(mul(a, b)); }, {a, b});
  run("scale", [&] { return weigh(scale(a, 1.7)); }, {a});
  run("add_row_bias", [&] { return weigh(add_row_bias(a, bias)); }, {a, bias});
  run("concat", [&] { return add(weigh(concat<double>({a, b}, 0)), weigh(concat<double>({a, b}, 1))); },
      {a, b});
  run("slice", [&] { return add(weigh(slice_rows(a, 1, r)), weigh(slice_cols(a, 0, c - 1))); },
      {a});
  run("transpose", [&] { return weigh(transpose(a)); }, {a});
  run("reshape", [&] { return weigh(reshape(a, {c, r})); }, {a});
  std::vector<std::size_t> counts(r);
  for (auto& x : counts) x = 1 + rng.index(3);
  run("repeat_rows", [&] { return weigh(repeat_rows(a, counts)); }, {a});
  const std::vector<std::size_t> ids{0, r - 1, 0};
  run("embedding", [&] { return weigh(embedding(a, ids)); }, {a});
  run("sigmoid", [&] { return weigh(sigmoid(b)); }, {b});
  run("relu", [&] { return weigh(relu(a)); }, {a});
  run("abs", [&] { return weigh(abs(a)); }, {a});
  run("log", [&] { return weigh(log(pos)); }, {pos});
  run("softplus", [&] { return weigh(softplus(b)); }, {b});
  run("softmax", [&] { return weigh(softmax(b)); }, {b});
  run("sum", [&] { return sum(mul(a, b)); }, {a, b});
  run("mean", [&] { return mean(mul(a, b)); }, {a, b});
  run("mean_axis", [&] { return add(weigh(mean_axis(a, 0)), weigh(mean_axis(a, 1))); }, {a});
  run("pick", [&] { return pick(reshape(mul(a, b), {r * c}), r * c - 1); }, {a, b});
  auto targets = Td({r, c}, std::vector<double>(r * c, 0.0));
  for (std::size_t i = 0; i < r * c; i += 2) targets.mutable_data()[i] = 1.0;
  run("bce_with_logits", [&] { return bce_with_logits(scale(b, 4.0), targets); }, {b});
  const Rng mask_rng = rng.fork(2);
  run("dropout", [&] {
        Rng local = mask_rng;  // identical mask on every evaluation
        return weigh(dropout(a, 0.1, true, local));
      },
      {a});
  weigh.probes.clear();
  out.push_back(reversed_check(
      "gradient_reversal", [&] { weigh.reset(); return weigh(gradient_reversal(b, 0.7)); }, b,
      0.7, opt));
  return out;
}

std::vector<GradCheckResult> composite_gradchecks(std::uint64_t seed,
                                                  const GradCheckOptions& opt) {
  const ModelConfig cfg = gradcheck_model_config();
  Rng rng(seed);
  Projector weigh{rng.fork(1), {}, 0};
  std::vector<GradCheckResult> out;
  const auto ctx = Context::eval();
  auto run = [&](const std::string& name, auto&& f, const std::vector<Td>& inputs) {
    weigh.probes.clear();
    out.push_back(check_gradients(name, [&] { weigh.reset(); return f(); }, inputs, opt));
  };

  {
    ParameterStore<double> store;
    GluBlock<double> glu(store, "glu", 4, 3, cfg.residual_scale, rng);
    auto x = random({4, 8}, rng);
    run("glu_block", [&] { return weigh(glu(x, ctx)); }, with({x}, tensors_of(store)));
  }
  {
    ParameterStore<double> store;
    SelfAttention<double> attention(store, "attention", cfg.decoder_dim(), rng);
    auto x = random({3, cfg.decoder_dim()}, rng);
    run("self_attention", [&] { return weigh(attention(x, ctx)); },
        with({x}, tensors_of(store)));
  }
  {
    ParameterStore<double> store;
    Encoder<double> encoder(store, cfg, rng);
    auto x = random({5, cfg.embed_dim}, rng);
    run("encoder", [&] { return weigh(encoder(x, ctx)); }, with({x}, tensors_of(store)));
  }
  {
    ParameterStore<double> store;
    Decoder<double> decoder(store, cfg, rng);
    auto x = random({4, cfg.decoder_dim()}, rng);
    run("decoder", [&] { return weigh(decoder(x, ctx)); }, with({x}, tensors_of(store)));
  }
  {
    ParameterStore<double> store;
    SingerClassifier<double> classifier(store, cfg, rng);
    classifier.conv1().freeze_spectral_norm();
    classifier.conv2().freeze_spectral_norm();
    auto e = random({5, cfg.embed_dim}, rng);
    const std::size_t labels[] = {1};
    auto loss = [&] {
      const Td probs[] = {classifier.classify(e, 0.5, ctx)};
      return singer_adv_loss<double>(probs, labels);
    };
    run("singer_classifier", loss, tensors_of(store));
    e.set_requires_grad(true);
    out.push_back(reversed_check("singer_classifier_input", loss, e, 0.5, opt));
  }
  {
    ParameterStore<double> store;
    Mrwds<double> mrwds(store, cfg, rng);
    for (auto& disc : mrwds.discriminators()) {
      for (auto& layer : disc.layers()) layer.freeze_spectral_norm();
      const std::size_t w = disc.window();
      auto feats = random({w, cfg.feature_dim()}, rng);
      std::optional<Td> cond;
      std::vector<Td> inputs{feats};
      if (disc.conditional()) {
        cond = random({w, cfg.condition_dim()}, rng);
        inputs.push_back(*cond);
      }
      std::vector<Td> own;
      for (auto& layer : disc.layers()) {
        own.push_back(layer.weight());
        own.push_back(layer.bias());
      }
      run(std::string(disc.conditional() ? "crwd" : "urwd") + std::to_string(w),
          [&] { return disc(feats, cond, ctx); }, with(inputs, own));
    }
  }
  {
    ParameterStore<double> store;
    EmbeddingTables<double> tables(store, cfg, rng);
    ScoreSequence seq{{0, 3, 5, 3}, {1, 4, 0, 2}, {2, 1, 3, 2}, 2};
    run("score_frontend",
        [&] {
          auto enc = encode_score_input(seq, tables);
          auto frames = assemble_decoder_input(expand(enc, FrameAlignment(seq.durations)),
                                               lookup_singer(seq.singer_id, tables));
          return weigh(frames);
        },
        tensors_of(store));
  }
  {
    auto pred = random({4, cfg.feature_dim()}, rng);
    auto target = random({4, cfg.feature_dim()}, rng, -1, 1, false);
    for (std::size_t t = 0; t < 4; ++t)
      target.mutable_data()[t * cfg.feature_dim() + cfg.vuv_index()] = double(t % 2);
    run("generation_loss", [&] { return generation_loss(pred, target, cfg).total; }, {pred});
    auto d_real = random({}, rng, -3, 3), d_fake = random({}, rng, -3, 3);
    run("gan_discriminator_loss", [&] { return gan_losses(d_real, d_fake).discriminator; },
        {d_real, d_fake});
    run("gan_generator_loss", [&] { return gan_losses(Td{}, d_fake).generator; }, {d_fake});
    run("gan_generator_loss_non_saturating",
        [&] { return gan_losses(Td{}, d_fake, true).generator; }, {d_fake});
  }
  return out;
}

}  // namespace asvs
