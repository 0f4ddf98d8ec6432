#include "asvs/trainer.hpp"

#include <cstdio>
#include <fstream>

#include "asvs/losses.hpp"

namespace asvs {

namespace {

enum Stream : std::uint64_t { kData = 11, kDropout, kWindows };

ModelConfig effective_model(const TrainConfig& cfg) {
  ModelConfig m = cfg.model;
  if (!cfg.system.multi_singer) m.n_singers = 1;
  return m;
}

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

double value(const Tensor<float>& t) { return t.defined() ? static_cast<double>(t.item()) : 0.0; }

Tensor<float> feature_tensor(const Utterance& u, std::size_t dims) {
  if (u.features.size() != u.frames * dims || u.frames != u.score.total_frames())
    throw AlignmentError(u.id + ": features do not match the score's durations");
  return Tensor<float>({u.frames, dims}, u.features);
}

}  // namespace

void TrainConfig::validate() const {
  system.validate();
  model.validate();
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(adam.lr > 0)) throw ConfigError("learning rate must be positive");
  if (adam.beta1 < 0 || adam.beta1 >= 1 || adam.beta2 < 0 || adam.beta2 >= 1)
    throw ConfigError("Adam betas must lie in [0, 1)");
  if (!(adam.epsilon > 0)) throw ConfigError("Adam epsilon must be positive");
  if (lambda_grl < 0) throw ConfigError("lambda_grl must be non-negative");
  if (clip_norm < 0) throw ConfigError("clip_norm must be non-negative");
  if (freeze_generator && !system.use_mrwds)
    throw ConfigError("freeze_generator leaves nothing to train without discriminators");
}

Trainer::Trainer(const TrainConfig& cfg)
    : cfg_(cfg),
      data_rng_(Rng::stream(cfg.seed, kData)),
      dropout_rng_(Rng::stream(cfg.seed, kDropout)),
      window_rng_(Rng::stream(cfg.seed, kWindows)) {
  cfg_.validate();
  cfg_.model = effective_model(cfg_);
  model_ = std::make_unique<AcousticModel<float>>(cfg_.model, cfg_.system.use_classifier,
                                                  cfg_.system.use_mrwds, cfg_.seed);
}

std::size_t Trainer::training_singer(const Utterance& u) const {
  return cfg_.system.multi_singer ? u.score.singer_id : 0;
}

std::vector<const Utterance*> Trainer::sample_batch(std::span<const Utterance* const> pool) {
  if (pool.empty()) throw ValidationError("cannot draw a batch from an empty pool");
  std::vector<const Utterance*> items(pool.begin(), pool.end());
  const std::size_t n = std::min(cfg_.batch_size, items.size());
  for (std::size_t i = 0; i < n; ++i)
    std::swap(items[i], items[i + data_rng_.index(items.size() - i)]);
  items.resize(n);
  return items;
}

std::vector<Parameter<float>*> Trainer::generator_update_set() const {
  const auto& w = cfg_.system.weights;
  const bool reconstruct = w.generation > 0 || (cfg_.system.use_mrwds && w.adversarial > 0);
  const bool singer = cfg_.system.use_classifier && w.singer > 0;
  std::vector<Parameter<float>*> out;
  for (auto* p : model_->generator_store().parameters()) {
    const auto& name = p->name;
    if (starts_with(name, "classifier.")) {
      if (singer) out.push_back(p);
    } else if (reconstruct) {
      out.push_back(p);
    } else if (singer && (starts_with(name, "encoder.") ||
                          name == "frontend.phoneme_table" || name == "frontend.pitch_table")) {
      out.push_back(p);
    }
  }
  return out;
}

Tensor<float> Trainer::discriminator_logit_loss(const DiscriminatorVerdict<float>& real,
                                                const DiscriminatorVerdict<float>& fake) const {
  if (!cfg_.per_disc_logistic) return gan_losses(real.total, fake.total).discriminator;
  Tensor<float> total;
  for (std::size_t k = 0; k < real.per_disc.size(); ++k) {
    auto l = gan_losses(real.per_disc[k], fake.per_disc[k]).discriminator;
    total = total.defined() ? add(total, l) : l;
  }
  return total;
}

Tensor<float> Trainer::generator_adv_loss(const DiscriminatorVerdict<float>& fake) const {
  if (!cfg_.per_disc_logistic)
    return gan_losses(Tensor<float>{}, fake.total, cfg_.non_saturating).generator;
  Tensor<float> total;
  for (const auto& d : fake.per_disc) {
    auto l = gan_losses(Tensor<float>{}, d, cfg_.non_saturating).generator;
    total = total.defined() ? add(total, l) : l;
  }
  return total;
}

Trainer::DiscriminatorOutcome Trainer::discriminator_step(
    std::span<const Utterance* const> batch, std::span<const GeneratorOutput<float>> outputs) {
  auto& mrwds = model_->mrwds();
  const auto ctx = Context::train(dropout_rng_, 0.0);
  const std::size_t dims = cfg_.model.feature_dim();
  Tensor<float> loss;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    // Generator outputs enter as constants: no gradient can reach G from here.
    const auto fake_features = outputs[i].features.detach();
    const auto condition = outputs[i].condition.detach();
    auto real = mrwds(feature_tensor(*batch[i], dims), condition, window_rng_, ctx);
    auto fake = mrwds(fake_features, condition, window_rng_, ctx);
    correct += (real.total.item() > 0) + (fake.total.item() < 0);
    auto l = discriminator_logit_loss(real, fake);
    loss = loss.defined() ? add(loss, l) : l;
  }
  loss = scale(loss, 1.0f / static_cast<float>(batch.size()));
  loss.backward();
  auto params = model_->discriminator_store().parameters();
  if (cfg_.clip_norm > 0) clip_grad_norm<float>(params, cfg_.clip_norm);
  adam_step<float>(params, cfg_.adam);
  return {value(loss), static_cast<double>(correct) / (2.0 * batch.size())};
}

std::vector<GeneratorOutput<float>> Trainer::generate_batch(
    std::span<const Utterance* const> batch) {
  std::vector<GeneratorOutput<float>> outputs;
  outputs.reserve(batch.size());
  const auto ctx = Context::train(dropout_rng_, cfg_.model.dropout);
  for (const auto* u : batch) {
    ScoreSequence seq = u->score;
    seq.singer_id = training_singer(*u);
    seq.validate(cfg_.model.phoneme_vocab, cfg_.model.pitch_vocab, cfg_.model.n_singers);
    outputs.push_back(model_->generate(seq, ctx));
  }
  return outputs;
}

Trainer::DiscriminatorOutcome Trainer::train_discriminator(
    std::span<const Utterance* const> batch) {
  if (batch.empty()) throw ValidationError("empty training batch");
  if (!cfg_.system.use_mrwds) throw ConfigError("this system has no discriminators");
  const auto outputs = generate_batch(batch);
  return discriminator_step(batch, outputs);
}

StepRecord Trainer::train_step(std::span<const Utterance* const> batch) {
  if (batch.empty()) throw ValidationError("empty training batch");
  const auto& sys = cfg_.system;
  const std::size_t dims = cfg_.model.feature_dim();
  StepRecord rec;
  rec.step = step_;

  // One generator pass serves both steps: the discriminator step never
  // changes generator parameters, so its fakes equal the generator step's.
  const auto outputs = generate_batch(batch);

  if (sys.use_mrwds) {
    const auto d = discriminator_step(batch, outputs);
    rec.l_adv_d = d.loss;
    rec.disc_accuracy = d.accuracy;
  }

  // Generation loss over all frames of the batch.
  std::vector<Tensor<float>> preds, targets;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    preds.push_back(outputs[i].features);
    targets.push_back(feature_tensor(*batch[i], dims));
  }
  const auto gen = generation_loss(concat(preds, 0), concat(targets, 0), cfg_.model);
  rec.l_g = value(gen.total);
  rec.l1_mgc = value(gen.l1_mgc);
  rec.l1_bap = value(gen.l1_bap);
  rec.ce_vuv = value(gen.ce_vuv);

  Tensor<float> singer_loss;
  if (sys.use_classifier) {
    std::vector<Tensor<float>> probs;
    std::vector<std::size_t> labels;
    const auto cls_ctx = Context::train(dropout_rng_, 0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      probs.push_back(model_->classifier().classify(
          outputs[i].encoding, static_cast<float>(cfg_.lambda_grl), cls_ctx));
      labels.push_back(training_singer(*batch[i]));
    }
    singer_loss = singer_adv_loss<float>(probs, labels);
    rec.l_adv_singer = value(singer_loss);
  }

  Tensor<float> adv_loss;
  if (sys.use_mrwds) {
    for (std::size_t i = 0; i < batch.size(); ++i) {
      // The discriminators were just updated; no second power iteration here.
      auto fake = model_->mrwds()(outputs[i].features, outputs[i].condition.detach(),
                                  window_rng_, Context::eval());
      auto l = generator_adv_loss(fake);
      adv_loss = adv_loss.defined() ? add(adv_loss, l) : l;
    }
    adv_loss = scale(adv_loss, 1.0f / static_cast<float>(batch.size()));
    rec.l_adv_g = value(adv_loss);
  }

  const auto total = total_generator_loss(gen.total, singer_loss, adv_loss, sys.weights);
  rec.l_total = value(total);

  if (!cfg_.freeze_generator && total.requires_grad()) {
    total.backward();
    const auto params = generator_update_set();
    if (cfg_.clip_norm > 0) clip_grad_norm<float>(params, cfg_.clip_norm);
    adam_step<float>(params, cfg_.adam);
  }
  // Gradients that reached the discriminators through the generator loss, or
  // generator parameters outside the update set, are dropped.
  model_->generator_store().zero_grad();
  model_->discriminator_store().zero_grad();

  ++step_;
  history_.push_back(rec);
  return rec;
}

std::vector<float> Trainer::synthesize(const ScoreSequence& seq) {
  ScoreSequence s = seq;
  if (!cfg_.system.multi_singer && s.singer_id != 0)
    throw VocabularyError("single-singer model only knows singer 0, got " +
                          std::to_string(s.singer_id));
  s.validate(cfg_.model.phoneme_vocab, cfg_.model.pitch_vocab, cfg_.model.n_singers);
  NoGradGuard guard;
  const auto out = model_->generate(s, Context::eval());
  std::vector<float> frames(out.features.data().begin(), out.features.data().end());
  const std::size_t dims = cfg_.model.feature_dim(), v = cfg_.model.vuv_index();
  // sigmoid(logit) > 0.5 exactly when logit > 0.
  for (std::size_t t = 0; t < out.features.dim(0); ++t)
    frames[t * dims + v] = frames[t * dims + v] > 0.0f ? 1.0f : 0.0f;
  return frames;
}

std::vector<float> Trainer::encode(const ScoreSequence& seq) {
  ScoreSequence s = seq;
  s.singer_id = cfg_.system.multi_singer ? s.singer_id : 0;
  s.validate(cfg_.model.phoneme_vocab, cfg_.model.pitch_vocab, cfg_.model.n_singers);
  NoGradGuard guard;
  const auto e = model_->encoder()(encode_score_input(s, model_->tables()), Context::eval());
  return {e.data().begin(), e.data().end()};
}

std::vector<const Utterance*> training_pool(const Corpus& corpus, const SystemConfig& system) {
  std::vector<const Utterance*> out;
  for (const auto* u : corpus.training())
    if (system.multi_singer || u->score.singer_id == 0) out.push_back(u);
  return out;
}

void check_compatible(const TrainConfig& cfg, const CorpusSpec& corpus) {
  const auto& m = cfg.model;
  if (m.n_mgc != corpus.n_mgc || m.n_bap != corpus.n_bap)
    throw ConfigError("model predicts " + std::to_string(m.n_mgc) + " MGC + " +
                      std::to_string(m.n_bap) + " BAP, corpus has " +
                      std::to_string(corpus.n_mgc) + " + " + std::to_string(corpus.n_bap));
  if (m.phoneme_vocab < corpus.phoneme_vocab || m.pitch_vocab < corpus.pitch_vocab)
    throw ConfigError("corpus vocabularies exceed the model's embedding tables");
  if (cfg.system.multi_singer && m.n_singers < corpus.n_singers)
    throw ConfigError("corpus has " + std::to_string(corpus.n_singers) + " singers, model " +
                      std::to_string(m.n_singers));
}

void run_training(Trainer& trainer, std::span<const Utterance* const> pool, std::size_t steps,
                  const std::function<void(const StepRecord&)>& on_step) {
  for (std::size_t i = 0; i < steps; ++i) {
    const auto batch = trainer.sample_batch(pool);
    const auto rec = trainer.train_step(batch);
    if (on_step) on_step(rec);
  }
}

std::string loss_csv_header() {
  return "step,L_G,L1_mgc,L1_bap,CE_vuv,L_adv_singer,L_adv_G,L_adv_D,L_total";
}

std::string loss_csv_row(const StepRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", r.step, r.l_g,
                r.l1_mgc, r.l1_bap, r.ce_vuv, r.l_adv_singer, r.l_adv_g, r.l_adv_d, r.l_total);
  return buf;
}

void write_loss_csv(const std::filesystem::path& path, std::span<const StepRecord> history) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << loss_csv_header() << "\n";
  for (const auto& r : history) out << loss_csv_row(r) << "\n";
}

}  // namespace asvs
