// Property-level acceptance suite. Each criterion prints one PASS/FAIL line
// followed by indented measurements; the exit code is the number of failures.

#include <CLI11.hpp>
#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asvs/checkpoint.hpp"
#include "asvs/classifier.hpp"
#include "asvs/corpus.hpp"
#include "asvs/evaluation.hpp"
#include "asvs/gradcheck_suite.hpp"
#include "asvs/kernels.hpp"
#include "asvs/losses.hpp"
#include "asvs/model.hpp"
#include "asvs/trainer.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;
using asvs::Tensor;
using Td = Tensor<double>;
using Tf = Tensor<float>;

namespace tol {
constexpr double kGradRelative = 1e-4;
constexpr double kGradSeconds = 120.0;
constexpr double kGrlRelative = 1e-12;
constexpr double kCeUniform = 1e-6;
constexpr double kGanZero = 1e-9;
constexpr double kOverfitLossFraction = 0.10;
constexpr double kOverfitMaeOverStd = 0.05;
constexpr std::size_t kOverfitMaxSteps = 2000;
constexpr double kOverfitSeconds = 600.0;
constexpr double kProbeChanceBand = 0.15;
constexpr double kDiscAccuracy = 0.9;
constexpr std::size_t kDiscStepBudget = 100;
constexpr double kGvOracle = 1e-10;
constexpr double kGvRelative = 0.05;
constexpr double kSigmaLow = 0.95, kSigmaHigh = 1.05;
}  // namespace tol

namespace {

struct Outcome {
  bool pass = false;
  std::vector<std::string> notes;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Reduced widths for the multi-run criteria. Vocabularies, singer count and
// the feature layout stay at the published values.
asvs::ModelConfig desk_model() {
  asvs::ModelConfig m;
  m.embed_dim = 32;
  m.singer_dim = 16;
  m.encoder_hidden1 = 32;
  m.encoder_hidden2 = 16;
  m.decoder_layers = 2;
  m.classifier_channels = 32;
  m.disc_channels = {16, 32, 64, 1};
  return m;
}

asvs::CorpusSpec unbalanced_spec() {
  asvs::CorpusSpec spec;
  spec.songs_per_singer = asvs::CorpusSpec::scaled_song_counts(0.1);
  spec.min_phonemes = 4;
  spec.max_phonemes = 12;
  spec.min_duration = 1;
  spec.max_duration = 6;
  spec.unbalance = 1.0;
  spec.eval_fraction = 0.0;
  spec.seed = 21;
  return spec;
}

asvs::TrainConfig desk_train(int system, std::uint64_t seed) {
  asvs::TrainConfig cfg;
  cfg.system = asvs::system_preset(system);
  cfg.model = desk_model();
  cfg.batch_size = 8;
  cfg.seed = seed;
  cfg.adam.lr = 1e-3;
  return cfg;
}

// ---------------------------------------------------------------- 1
Outcome gradient_integrity() {
  Outcome o{true, {}};
  asvs::GradCheckOptions opts;
  opts.tolerance = tol::kGradRelative;
  const auto t0 = Clock::now();
  auto results = asvs::primitive_gradchecks(17, opts);
  auto composite = asvs::composite_gradchecks(17, opts);
  results.insert(results.end(), composite.begin(), composite.end());
  const double secs = seconds_since(t0);
  double worst = 0;
  std::string worst_name;
  for (const auto& r : results) {
    if (r.relative_error > worst) worst = r.relative_error, worst_name = r.name;
    if (!r.passed) {
      o.pass = false;
      o.notes.push_back(fmt("failed: %s rel %.3e", r.name.c_str(), r.relative_error));
    }
  }
  o.notes.push_back(fmt("%zu checks (%zu composite), worst %s rel %.3e, %.1f s", results.size(),
                        composite.size(), worst_name.c_str(), worst, secs));
  if (secs >= tol::kGradSeconds) o.pass = false;
  return o;
}

// ---------------------------------------------------------------- 2
// The reference path rebuilds the classifier without the reversal layer.
Td classifier_without_grl(asvs::SingerClassifier<double>& cls, const Td& encoding) {
  const auto ctx = asvs::Context::eval();
  auto h = asvs::relu(cls.conv1()(asvs::transpose(encoding), ctx));
  h = asvs::relu(cls.conv2()(h, ctx));
  auto pooled = asvs::reshape(asvs::mean_axis(h, 1), {1, h.dim(0)});
  return asvs::reshape(asvs::softmax(cls.out_linear()(pooled)), {cls.classes()});
}

Outcome grl_contract() {
  Outcome o{true, {}};
  asvs::ModelConfig cfg;
  asvs::AcousticModel<double> model(cfg, true, false, 5);
  const asvs::ScoreSequence seq{{3, 17, 42, 8, 60, 29}, {30, 32, 33, 35, 37, 30}, {2, 3, 1, 4, 2, 2}, 4};
  const std::size_t label[] = {2};

  auto encoder_side_grad = [&](std::optional<double> lambda) {
    model.generator_store().zero_grad();
    auto e = model.encoder()(asvs::encode_score_input(seq, model.tables()), asvs::Context::eval());
    const Td probs[] = {lambda ? model.classifier().classify(e, *lambda, asvs::Context::eval())
                               : classifier_without_grl(model.classifier(), e)};
    asvs::singer_adv_loss<double>(probs, label).backward();
    std::vector<double> g;
    for (auto* p : model.generator_store().parameters())
      if (p->name.rfind("encoder.", 0) == 0 || p->name == "frontend.phoneme_table" ||
          p->name == "frontend.pitch_table")
        g.insert(g.end(), p->tensor.grad().begin(), p->tensor.grad().end());
    return std::make_pair(g, std::vector<double>(probs[0].data().begin(), probs[0].data().end()));
  };

  const auto [g_ref, p_ref] = encoder_side_grad(std::nullopt);
  double ref_norm = 0;
  for (double v : g_ref) ref_norm = std::max(ref_norm, std::abs(v));
  if (ref_norm == 0) {
    o.pass = false;
    o.notes.push_back("reference gradient is identically zero");
  }
  asvs::Rng rng(8);
  for (double lambda : {0.0, 0.5, 1.0, 2.0}) {
    std::vector<double> xs(64);
    for (auto& v : xs) v = rng.normal();
    const Td x({8, 8}, xs);
    const auto y = asvs::gradient_reversal(x, lambda);
    const bool identity = std::equal(y.data().begin(), y.data().end(), x.data().begin());
    const auto [g, p] = encoder_side_grad(lambda);
    const bool same_probs = p == p_ref;
    double err = 0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(g[i] + lambda * g_ref[i]));
    const double rel = err / ref_norm;
    const bool ok = identity && same_probs && rel <= tol::kGrlRelative;
    o.pass = o.pass && ok;
    o.notes.push_back(fmt("lambda %.1f: forward identical %s, classifier output identical %s, "
                          "max |g + lambda g_ref| / max|g_ref| = %.2e",
                          lambda, identity ? "yes" : "no", same_probs ? "yes" : "no", rel));
  }
  return o;
}

// ---------------------------------------------------------------- 3
Outcome architecture_audit() {
  Outcome o{true, {}};
  using S = asvs::Shape;
  std::map<std::string, S> expected{
      {"frontend.phoneme_table", S{71, 384}},
      {"frontend.pitch_table", S{84, 384}},
      {"frontend.singer_table", S{7, 64}},
      {"encoder.linear1.weight", S{384, 256}}, {"encoder.linear1.bias", S{256}},
      {"encoder.linear2.weight", S{256, 64}},  {"encoder.linear2.bias", S{64}},
      {"encoder.linear3.weight", S{64, 384}},  {"encoder.linear3.bias", S{384}},
      {"encoder.glu0.conv_a.weight", S{64, 64, 3}}, {"encoder.glu0.conv_a.bias", S{64}},
      {"encoder.glu0.conv_b.weight", S{64, 64, 3}}, {"encoder.glu0.conv_b.bias", S{64}},
      {"decoder.out_linear.weight", S{448, 66}}, {"decoder.out_linear.bias", S{66}},
      {"classifier.conv1.weight", S{128, 384, 3}}, {"classifier.conv1.bias", S{128}},
      {"classifier.conv2.weight", S{128, 128, 3}}, {"classifier.conv2.bias", S{128}},
      {"classifier.out_linear.weight", S{128, 7}}, {"classifier.out_linear.bias", S{7}},
  };
  for (int l = 0; l < 6; ++l) {
    const std::string p = "decoder.layer" + std::to_string(l) + ".";
    for (const char* proj : {"query", "key", "value", "output"}) {
      expected[p + "attention." + proj + ".weight"] = S{448, 448};
      expected[p + "attention." + proj + ".bias"] = S{448};
    }
    for (const char* conv : {"conv_a", "conv_b"}) {
      expected[p + "glu." + conv + ".weight"] = S{448, 448, 3};
      expected[p + "glu." + conv + ".bias"] = S{448};
    }
  }
  for (const char* d : {"urwd2", "urwd4", "crwd2", "crwd4"}) {
    const std::string p = std::string("mrwds.") + d + ".";
    const bool conditional = d[0] == 'c';
    expected[p + "layer0.weight"] = S{64, 66, 3};
    expected[p + "layer1.weight"] = S{128, 64, 3};
    expected[p + "layer2.weight"] = S{256, 128, 3};
    expected[p + "layer3.weight"] = S{1, conditional ? 256u + 448u : 256u, 1};
    expected[p + "layer0.bias"] = S{64};
    expected[p + "layer1.bias"] = S{128};
    expected[p + "layer2.bias"] = S{256};
    expected[p + "layer3.bias"] = S{1};
  }

  asvs::AcousticModel<float> model(asvs::ModelConfig{}, true, true, 1);
  std::map<std::string, S> actual;
  for (auto* store : {&model.generator_store(), &model.discriminator_store()})
    for (auto* p : store->parameters()) actual[p->name] = p->tensor.shape();
  std::size_t mismatched = 0;
  for (const auto& [name, shape] : expected) {
    auto it = actual.find(name);
    if (it == actual.end() || it->second != shape) {
      ++mismatched;
      o.notes.push_back("mismatch or missing: " + name);
    }
  }
  for (const auto& [name, shape] : actual)
    if (!expected.count(name)) {
      ++mismatched;
      o.notes.push_back("unexpected parameter: " + name);
    }

  // Dynamic checks: the condition width and the discriminator windows.
  const asvs::ScoreSequence seq{{1, 2, 3}, {40, 41, 42}, {2, 1, 3}, 5};
  const auto out = model.generate(seq, asvs::Context::eval());
  std::vector<std::size_t> windows;
  for (auto& d : model.mrwds().discriminators()) windows.push_back(d.window());
  const bool dynamic = out.condition.shape() == S{6, 448} && out.features.shape() == S{6, 66} &&
                       out.encoding.shape() == S{3, 384} &&
                       windows == std::vector<std::size_t>{2, 4, 2, 4};
  std::size_t sn = 0;
  for (auto* layer : {&model.classifier().conv1(), &model.classifier().conv2()}) sn += layer->spectral_norm();
  for (auto& d : model.mrwds().discriminators())
    for (auto& layer : d.layers()) sn += layer.spectral_norm();
  o.pass = mismatched == 0 && dynamic && sn == 18;
  o.notes.push_back(fmt("%zu parameter tensors audited, %zu mismatches; condition [%zu x %zu], "
                        "windows {2,4} x {uncond, cond}; %zu spectrally normalised convolutions",
                        expected.size(), mismatched, out.condition.dim(0), out.condition.dim(1), sn));
  return o;
}

// ---------------------------------------------------------------- 4
Outcome loss_formulas() {
  Outcome o{true, {}};
  asvs::ModelConfig cfg;
  asvs::Rng rng(12);
  std::vector<double> p(10 * 66), t(10 * 66);
  for (auto& v : p) v = rng.uniform(-2, 2);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = i % 66 == 65 ? double(rng.index(2)) : rng.uniform(-2, 2);
  const auto gen = asvs::generation_loss(Td({10, 66}, p), Td({10, 66}, t), cfg);
  const double sum = gen.l1_mgc.item() + gen.l1_bap.item() + gen.ce_vuv.item();
  const bool eq1 = std::abs(sum - gen.total.item()) <= 1e-12 * std::abs(sum);
  o.notes.push_back(fmt("generation: %.12f + %.12f + %.12f vs total %.12f", gen.l1_mgc.item(),
                        gen.l1_bap.item(), gen.ce_vuv.item(), gen.total.item()));

  const Td uniform({7}, std::vector<double>(7, 1.0 / 7.0));
  const Td batch[] = {uniform, uniform, uniform};
  const std::size_t labels[] = {0, 3, 6};
  const double ce = asvs::singer_adv_loss<double>(batch, labels).item();
  const bool eq2 = std::abs(ce / 3.0 - std::log(7.0)) <= tol::kCeUniform;
  o.notes.push_back(fmt("singer CE, uniform prediction: %.9f per sample (ln 7 = %.9f)", ce / 3.0,
                        std::log(7.0)));

  const auto gan = asvs::gan_losses(Td::scalar(0.0), Td::scalar(0.0));
  const bool eq34 = std::abs(gan.discriminator.item() - 2 * std::log(2.0)) <= tol::kGanZero &&
                    std::abs(gan.generator.item() - std::log(0.5)) <= tol::kGanZero;
  o.notes.push_back(fmt("GAN at zero logits: D %.12f, G %.12f", gan.discriminator.item(),
                        gan.generator.item()));

  // Table rows: weights and active modules per system.
  const double weights[5][3] = {{1, 0, 0}, {1, 0, 0}, {1, 1, 0}, {10, 0, 1}, {10, 2, 1}};
  const bool modules[5][3] = {{false, false, false}, {true, false, false}, {true, true, false},
                              {true, false, true},   {true, true, true}};
  bool eq5 = true;
  const Td a = Td::scalar(0.75), b = Td::scalar(1.5), c = Td::scalar(-0.25);
  for (int id = 1; id <= 5; ++id) {
    const auto s = asvs::system_preset(id);
    const double* w = weights[id - 1];
    eq5 = eq5 && s.weights.generation == w[0] && s.weights.singer == w[1] &&
          s.weights.adversarial == w[2] && s.multi_singer == modules[id - 1][0] &&
          s.use_classifier == modules[id - 1][1] && s.use_mrwds == modules[id - 1][2];
    const double total = asvs::total_generator_loss(a, b, c, s.weights).item();
    eq5 = eq5 && std::abs(total - (w[0] * 0.75 + w[1] * 1.5 + w[2] * -0.25)) <= 1e-15;
  }
  o.notes.push_back(fmt("presets: %s", eq5 ? "all five rows reproduced" : "mismatch"));
  o.pass = eq1 && eq2 && eq34 && eq5;
  return o;
}

// ---------------------------------------------------------------- 5
Outcome mrwds_identity() {
  Outcome o{true, {}};
  asvs::ModelConfig cfg;
  asvs::AcousticModel<float> model(cfg, false, true, 9);
  auto& mrwds = model.mrwds();
  asvs::Rng rng(13);
  std::size_t bitwise = 0, invariant = 0, trials = 0;
  for (std::size_t T : {1u, 3u, 17u, 120u}) {
    for (int rep = 0; rep < 5; ++rep, ++trials) {
      std::vector<float> f(T * 66), c(T * 448), c2(T * 448);
      for (auto& v : f) v = float(rng.normal());
      for (auto& v : c) v = float(rng.normal());
      for (auto& v : c2) v = float(rng.normal());
      const Tf feats({T, 66}, f);
      asvs::Rng w1(100 + rep), w2(100 + rep);
      const auto v1 = mrwds(feats, Tf({T, 448}, c), w1, asvs::Context::eval());
      const auto v2 = mrwds(feats, Tf({T, 448}, c2), w2, asvs::Context::eval());
      float s = v1.per_disc[0].item();
      for (std::size_t k = 1; k < v1.per_disc.size(); ++k) s += v1.per_disc[k].item();
      bitwise += v1.per_disc.size() == 4 && v1.total.item() == s;
      invariant += v1.per_disc[0].item() == v2.per_disc[0].item() &&
                   v1.per_disc[1].item() == v2.per_disc[1].item();
    }
  }
  o.pass = bitwise == trials && invariant == trials;
  o.notes.push_back(fmt("total == left-to-right sum bitwise in %zu/%zu; unconditional scores "
                        "unchanged under condition resampling in %zu/%zu",
                        bitwise, trials, invariant, trials));
  return o;
}

// ---------------------------------------------------------------- 6
std::uint64_t checksum(const asvs::ParameterStore<float>& store) {
  std::uint64_t h = 1469598103934665603ULL;
  for (auto* p : store.parameters())
    for (float v : p->tensor.data()) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      for (int i = 0; i < 4; ++i) {
        h ^= (bits >> (8 * i)) & 0xff;
        h *= 1099511628211ULL;
      }
    }
  return h;
}

Outcome alternation() {
  Outcome o{true, {}};
  const auto corpus = asvs::generate_corpus(unbalanced_spec());
  const auto pool = corpus.training();
  asvs::Trainer probe(desk_train(5, 3));
  const auto batch = probe.sample_batch(pool);

  asvs::Trainer d_only(desk_train(5, 3)), full(desk_train(5, 3));
  const auto g0 = checksum(d_only.model().generator_store());
  const auto d0 = checksum(d_only.model().discriminator_store());
  d_only.train_discriminator(batch);
  const bool g_still = checksum(d_only.model().generator_store()) == g0;
  const bool d_moved = checksum(d_only.model().discriminator_store()) != d0;
  // A parameter the backward never reached has no gradient buffer at all.
  std::size_t nonzero = 0, total = 0;
  for (auto* p : d_only.model().generator_store().parameters()) {
    ++total;
    const auto& g = p->tensor.grad();
    nonzero += std::any_of(g.begin(), g.end(), [](float v) { return v != 0.0f; });
  }

  full.train_step(batch);
  const bool d_same = checksum(full.model().discriminator_store()) ==
                      checksum(d_only.model().discriminator_store());
  const bool g_moved = checksum(full.model().generator_store()) != g0;
  o.pass = g_still && d_moved && nonzero == 0 && d_same && g_moved;
  o.notes.push_back(fmt("D step: generator checksum %s, discriminator %s, %zu/%zu generator "
                        "parameters with non-zero gradient",
                        g_still ? "unchanged" : "CHANGED", d_moved ? "moved" : "NOT moved",
                        nonzero, total));
  o.notes.push_back(fmt("G step: discriminators %s the D-step-only state, generator %s",
                        d_same ? "identical to" : "DIFFER from", g_moved ? "moved" : "NOT moved"));
  return o;
}

// ---------------------------------------------------------------- 7 and 9
struct OverfitRun {
  std::unique_ptr<asvs::Trainer> trainer;
  asvs::Corpus corpus;
  double initial = 0, final_loss = 0, worst_ratio = 0, seconds = 0;
  std::size_t steps = 0;
  bool loss_ok = false, mae_ok = false;
};

asvs::CorpusSpec overfit_spec() {
  asvs::CorpusSpec spec;
  spec.n_singers = 1;
  spec.songs_per_singer = {4};
  spec.min_phonemes = 3;
  spec.max_phonemes = 5;
  spec.min_duration = 2;
  spec.max_duration = 6;
  spec.unbalance = 0.0;
  spec.eval_fraction = 0.0;
  spec.seed = 7;
  return spec;
}

// Largest per-dimension MGC mean absolute error divided by the target's std.
double worst_mae_ratio(asvs::Trainer& tr, const asvs::Corpus& corpus) {
  const std::size_t dims = corpus.spec.feature_dim(), n_mgc = corpus.spec.n_mgc;
  std::vector<double> abs_err(n_mgc, 0), sum(n_mgc, 0), sq(n_mgc, 0);
  std::size_t n = 0;
  for (const auto& u : corpus.utterances) {
    const auto out = tr.synthesize(u.score);
    for (std::size_t t = 0; t < u.frames; ++t, ++n)
      for (std::size_t d = 0; d < n_mgc; ++d) {
        const double y = u.features[t * dims + d];
        abs_err[d] += std::abs(out[t * dims + d] - y);
        sum[d] += y;
        sq[d] += y * y;
      }
  }
  double worst = 0;
  for (std::size_t d = 0; d < n_mgc; ++d) {
    const double mean = sum[d] / n;
    const double sd = std::sqrt(std::max(sq[d] / n - mean * mean, 0.0));
    worst = std::max(worst, (abs_err[d] / n) / sd);
  }
  return worst;
}

double g_overfit_lr = 3e-4;

OverfitRun& overfit_run() {
  static std::optional<OverfitRun> cached;
  if (cached) return *cached;
  OverfitRun run;
  run.corpus = asvs::generate_corpus(overfit_spec());
  asvs::TrainConfig cfg;
  cfg.system = asvs::system_preset(1);
  cfg.batch_size = 4;
  cfg.seed = 1;
  cfg.adam.lr = g_overfit_lr;
  cfg.model.dropout = 0.0;
  run.trainer = std::make_unique<asvs::Trainer>(cfg);
  const auto pool = run.corpus.training();
  const auto t0 = Clock::now();
  for (std::size_t step = 0; step < tol::kOverfitMaxSteps; ++step) {
    const auto rec = run.trainer->train_step(run.trainer->sample_batch(pool));
    if (step == 0) run.initial = rec.l_g;
    run.final_loss = rec.l_g;
    run.steps = step + 1;
    run.loss_ok = rec.l_g < tol::kOverfitLossFraction * run.initial;
    if (run.loss_ok && run.steps % 25 == 0) {
      run.worst_ratio = worst_mae_ratio(*run.trainer, run.corpus);
      run.mae_ok = run.worst_ratio <= tol::kOverfitMaeOverStd;
      if (run.mae_ok) break;
    }
    if (run.steps % 100 == 0)
      std::fprintf(stderr, "  overfit step %zu: L_G %.5f, MAE/std %.4f, %.0f s\n", run.steps,
                   rec.l_g, run.worst_ratio, seconds_since(t0));
  }
  if (!run.mae_ok) {
    run.worst_ratio = worst_mae_ratio(*run.trainer, run.corpus);
    run.mae_ok = run.worst_ratio <= tol::kOverfitMaeOverStd;
  }
  run.seconds = seconds_since(t0);
  cached = std::move(run);
  return *cached;
}

Outcome overfit() {
  auto& run = overfit_run();
  Outcome o;
  o.pass = run.loss_ok && run.mae_ok && run.seconds < tol::kOverfitSeconds;
  std::size_t frames = 0;
  for (const auto& u : run.corpus.utterances) frames += u.frames;
  o.notes.push_back(fmt("4 utterances, %zu frames; L_G %.4f -> %.4f (%.1f%% of initial) after "
                        "%zu steps, %.0f s",
                        frames, run.initial, run.final_loss, 100 * run.final_loss / run.initial,
                        run.steps, run.seconds));
  o.notes.push_back(fmt("worst per-dim MGC MAE / target std = %.4f", run.worst_ratio));
  return o;
}

// ---------------------------------------------------------------- 8
std::vector<std::vector<double>> pooled_encodings(asvs::Trainer& tr, const asvs::Corpus& corpus) {
  std::vector<std::vector<double>> x;
  for (const auto& u : corpus.utterances)
    x.push_back(asvs::mean_pool(tr.encode(u.score), tr.model().config().embed_dim));
  return x;
}

Outcome adversarial_effect(std::size_t steps) {
  Outcome o;
  const auto corpus = asvs::generate_corpus(unbalanced_spec());
  const auto pool = corpus.training();
  std::vector<std::size_t> labels;
  for (const auto& u : corpus.utterances) labels.push_back(u.score.singer_id);

  double acc[2] = {0, 0};
  for (int k = 0; k < 2; ++k) {
    const int system = k == 0 ? 2 : 3;
    asvs::Trainer tr(desk_train(system, 5));
    const auto t0 = Clock::now();
    double last_singer = 0, last_lg = 0;
    asvs::run_training(tr, pool, steps, [&](const asvs::StepRecord& r) {
      last_singer = r.l_adv_singer;
      last_lg = r.l_g;
    });
    acc[k] = asvs::singer_probe(pooled_encodings(tr, corpus), labels).accuracy;
    o.notes.push_back(fmt("System%d: %zu steps (%.0f s), final L_G %.4f, L_adv_singer %.4f, probe "
                          "accuracy %.4f",
                          system, steps, seconds_since(t0), last_lg, last_singer, acc[k]));
  }
  const double chance = 1.0 / 7.0;
  const bool lower = acc[1] < acc[0];
  const bool near_chance = std::abs(acc[1] - chance) <= tol::kProbeChanceBand;

  auto cfg = desk_train(4, 5);
  cfg.freeze_generator = true;
  asvs::Trainer tr(cfg);
  std::size_t reached = 0;
  std::vector<double> accs;
  for (std::size_t step = 1; step <= tol::kDiscStepBudget; ++step) {
    accs.push_back(tr.train_step(tr.sample_batch(pool)).disc_accuracy);
    if (accs.size() >= 10) {
      double mean = 0;
      for (std::size_t i = accs.size() - 10; i < accs.size(); ++i) mean += accs[i];
      if (mean / 10 > tol::kDiscAccuracy) {
        reached = step;
        break;
      }
    }
  }
  o.notes.push_back(fmt("probe: System3 %.4f vs System2 %.4f (chance %.4f): %s, %s", acc[1], acc[0],
                        chance, lower ? "lower" : "NOT lower",
                        near_chance ? "within band" : "OUTSIDE band"));
  o.notes.push_back(reached ? fmt("frozen-generator discriminators: 10-step mean accuracy > %.2f "
                                  "at step %zu",
                                  tol::kDiscAccuracy, reached)
                            : fmt("frozen-generator discriminators: accuracy never exceeded %.2f "
                                  "in %zu steps",
                                  tol::kDiscAccuracy, tol::kDiscStepBudget));
  o.pass = lower && near_chance && reached > 0;
  return o;
}

// ---------------------------------------------------------------- 9
Outcome gv_oracle() {
  Outcome o;
  asvs::Rng rng(19);
  std::vector<std::vector<float>> utts;
  for (int u = 0; u < 12; ++u) {
    std::vector<float> x((2 + rng.index(60)) * 66);
    for (auto& v : x) v = float(3.0 * u + (0.5 + u) * rng.normal());
    utts.push_back(std::move(x));
  }
  const auto gv = asvs::global_variance(utts, 66, 66);
  double worst_oracle = 0;
  for (std::size_t d = 0; d < 66; ++d) {
    double acc = 0;
    for (const auto& x : utts) {
      const std::size_t n = x.size() / 66;
      double mean = 0, ss = 0;
      for (std::size_t t = 0; t < n; ++t) mean += x[t * 66 + d];
      mean /= n;
      for (std::size_t t = 0; t < n; ++t) ss += (x[t * 66 + d] - mean) * (x[t * 66 + d] - mean);
      acc += ss / n;
    }
    worst_oracle = std::max(worst_oracle, std::abs(gv[d] - acc / utts.size()));
  }
  o.notes.push_back(fmt("streaming vs two-pass GV: max abs difference %.2e", worst_oracle));

  // Criterion 7 stops as soon as the MAE bound holds; a fully fitted model is
  // wanted here, so keep training the same run up to the shared step cap.
  auto& run = overfit_run();
  const std::size_t dims = run.corpus.spec.feature_dim();
  std::vector<std::vector<float>> reference;
  for (const auto& u : run.corpus.utterances) reference.push_back(u.features);
  const auto r = asvs::global_variance(reference, dims, dims);
  double worst = 0;
  std::size_t worst_dim = 0, within = 0;
  auto measure = [&] {
    std::vector<std::vector<float>> generated;
    for (const auto& u : run.corpus.utterances) generated.push_back(run.trainer->synthesize(u.score));
    const auto g = asvs::global_variance(generated, dims, dims);
    worst = 0, worst_dim = 0, within = 0;
    for (std::size_t d = 0; d < dims; ++d) {
      const double rel = std::abs(g[d] - r[d]) / r[d];
      within += rel <= tol::kGvRelative;
      if (rel > worst) worst = rel, worst_dim = d;
    }
  };
  const std::size_t start = run.steps;
  const auto pool = run.corpus.training();
  measure();
  while (within < dims && run.steps < tol::kOverfitMaxSteps) {
    run.trainer->train_step(run.trainer->sample_batch(pool));
    if (++run.steps % 25 == 0) measure();
  }
  if (run.steps > start)
    o.notes.push_back(fmt("overfit model trained on from step %zu to %zu", start, run.steps));
  o.notes.push_back(fmt("overfit model: %zu/%zu dims within %.0f%% of reference GV, worst dim %zu "
                        "at %.2f%%",
                        within, dims, 100 * tol::kGvRelative, worst_dim, 100 * worst));
  o.pass = worst_oracle <= tol::kGvOracle && within == dims;
  return o;
}

// ---------------------------------------------------------------- 10
double top_singular_value(const std::vector<float>& w, std::size_t rows) {
  const std::size_t cols = w.size() / rows;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = w[r * cols + c];
  return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

Outcome spectral_norm(std::size_t steps) {
  Outcome o;
  const auto corpus = asvs::generate_corpus(unbalanced_spec());
  asvs::Trainer tr(desk_train(5, 7));
  asvs::run_training(tr, corpus.training(), steps);
  auto& model = tr.model();
  std::vector<std::pair<std::string, asvs::Conv1dLayer<float>*>> layers{
      {"classifier.conv1", &model.classifier().conv1()},
      {"classifier.conv2", &model.classifier().conv2()}};
  for (auto& d : model.mrwds().discriminators())
    for (std::size_t i = 0; i < d.layers().size(); ++i)
      layers.emplace_back(fmt("disc w%zu%s layer%zu", d.window(), d.conditional() ? "c" : "u", i),
                          &d.layers()[i]);
  double lo = 1e9, hi = 0;
  std::size_t inside = 0;
  for (auto& [name, layer] : layers) {
    // The weight as the network currently uses it, with the stored estimate.
    const auto w = layer->effective_weight(false);
    const double s = top_singular_value({w.data().begin(), w.data().end()}, w.dim(0));
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    inside += s >= tol::kSigmaLow && s <= tol::kSigmaHigh;
  }
  o.pass = inside == layers.size();
  o.notes.push_back(fmt("after %zu steps: %zu/%zu normalised weights with dense-SVD top singular "
                        "value in [%.2f, %.2f]; range [%.6f, %.6f]",
                        steps, inside, layers.size(), tol::kSigmaLow, tol::kSigmaHigh, lo, hi));
  return o;
}

// ---------------------------------------------------------------- 11
std::string loss_csv_of(const asvs::TrainConfig& cfg, const asvs::Corpus& corpus,
                        std::size_t steps, int threads, const fs::path& path) {
  asvs::kernels::set_num_threads(threads);
  asvs::Trainer tr(cfg);
  asvs::run_training(tr, corpus.training(), steps);
  asvs::write_loss_csv(path, tr.history());
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(std::size_t steps) {
  Outcome o;
  const auto corpus = asvs::generate_corpus(unbalanced_spec());
  const auto dir = fs::temp_directory_path() / "asvs_acceptance";
  fs::create_directories(dir);
  const int threads = asvs::kernels::num_threads();
  const auto cfg = desk_train(5, 11);
  const auto a = loss_csv_of(cfg, corpus, steps, 1, dir / "a.csv");
  const auto b = loss_csv_of(cfg, corpus, steps, std::max(threads, 2), dir / "b.csv");
  asvs::kernels::set_num_threads(threads);
  const auto lines = std::count(a.begin(), a.end(), '\n');
  o.pass = a == b && lines == static_cast<long>(steps) + 1;
  o.notes.push_back(fmt("System5, %zu steps, 1 vs %d threads: loss CSVs %s (%zu bytes, %ld lines)",
                        steps, std::max(threads, 2), a == b ? "bitwise identical" : "DIFFER",
                        a.size(), static_cast<long>(lines)));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  std::size_t adversarial_steps = 1000, sn_steps = 200, determinism_steps = 30;
  app.add_option("criteria", only, "Run only these criteria (1-11)");
  app.add_option("--adversarial-steps", adversarial_steps, "Training steps per system in 8");
  app.add_option("--sn-steps", sn_steps, "Training steps before the spectral-norm audit");
  app.add_option("--overfit-lr", g_overfit_lr, "Learning rate of the overfit run in 7 and 9");
  app.add_option("--determinism-steps", determinism_steps, "Steps per run in 11");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient integrity", gradient_integrity},
      {"GRL contract", grl_contract},
      {"architecture conformance", architecture_audit},
      {"loss formulas", loss_formulas},
      {"MRWDs sum identity", mrwds_identity},
      {"alternation and detachment", alternation},
      {"overfit convergence", overfit},
      {"adversarial effect", [&] { return adversarial_effect(adversarial_steps); }},
      {"GV oracle", gv_oracle},
      {"spectral normalisation", [&] { return spectral_norm(sn_steps); }},
      {"determinism", [&] { return determinism(determinism_steps); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome out;
    try {
      out = criteria[i].second();
    } catch (const std::exception& e) {
      out.pass = false;
      out.notes.push_back(std::string("exception: ") + e.what());
    }
    failures += !out.pass;
    std::printf("%s  %2d %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", id, criteria[i].first,
                seconds_since(t0));
    for (const auto& n : out.notes) std::printf("        %s\n", n.c_str());
    std::fflush(stdout);
  }
  return failures;
}
