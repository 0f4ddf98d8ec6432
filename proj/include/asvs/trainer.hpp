#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "asvs/corpus.hpp"
#include "asvs/model.hpp"
#include "asvs/optim.hpp"
#include "asvs/system_config.hpp"

namespace asvs {

/// Everything that determines a training run.
struct TrainConfig {
  SystemConfig system = system_preset(1);
  ModelConfig model;
  AdamConfig adam;  // shared by generator and discriminators
  std::size_t batch_size = 32;
  std::size_t steps = 1000;
  std::uint64_t seed = 1;
  double lambda_grl = 1.0;
  double clip_norm = 1.0;        // global gradient-norm clip per optimizer group; 0 disables
  bool non_saturating = false;   // generator adversarial loss -log s(d_fake) instead of log(1 - s)
  bool per_disc_logistic = false;  // logistic loss per discriminator instead of on the sum
  bool freeze_generator = false;   // train the discriminators only
  std::string corpus_dir;
  std::string out_dir = "run";
  std::size_t checkpoint_every = 0;  // 0: only at the end

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// One row of the loss history. Inactive terms are 0.
struct StepRecord {
  std::size_t step = 0;
  double l_g = 0, l1_mgc = 0, l1_bap = 0, ce_vuv = 0;
  double l_adv_singer = 0, l_adv_g = 0, l_adv_d = 0, l_total = 0;
  double disc_accuracy = 0;  // fraction of real scored > 0 and fake scored < 0 in the D step
};

/// Training state and the alternating update. The discriminator step sees
/// detached generator outputs; the generator step updates the generator
/// store only.
class Trainer {
 public:
  explicit Trainer(const TrainConfig& cfg);

  /// One discriminator step (if the system uses MRWDs) followed by one
  /// generator step (unless the generator is frozen).
  StepRecord train_step(std::span<const Utterance* const> batch);

  struct DiscriminatorOutcome {
    double loss = 0, accuracy = 0;
  };
  /// Generator forward plus a discriminator update only; generator
  /// gradients are left as the discriminator backward produced them (none).
  DiscriminatorOutcome train_discriminator(std::span<const Utterance* const> batch);

  /// Draws a batch (without replacement within the batch) from `pool`.
  std::vector<const Utterance*> sample_batch(std::span<const Utterance* const> pool);

  /// Eval-mode forward, VUV column thresholded to 0/1. [frames x feature_dim].
  std::vector<float> synthesize(const ScoreSequence& seq);

  /// Eval-mode score encoding E(x), row-major [len x embed_dim].
  std::vector<float> encode(const ScoreSequence& seq);

  const TrainConfig& config() const { return cfg_; }
  AcousticModel<float>& model() { return *model_; }
  const AcousticModel<float>& model() const { return *model_; }
  std::size_t step() const { return step_; }
  void set_step(std::size_t s) { step_ = s; }
  const std::vector<StepRecord>& history() const { return history_; }

  /// Parameters the generator step updates under the current system.
  std::vector<Parameter<float>*> generator_update_set() const;

 private:
  std::vector<GeneratorOutput<float>> generate_batch(std::span<const Utterance* const> batch);
  DiscriminatorOutcome discriminator_step(std::span<const Utterance* const> batch,
                                          std::span<const GeneratorOutput<float>> outputs);
  Tensor<float> discriminator_logit_loss(const DiscriminatorVerdict<float>& real,
                                         const DiscriminatorVerdict<float>& fake) const;
  Tensor<float> generator_adv_loss(const DiscriminatorVerdict<float>& fake) const;
  std::size_t training_singer(const Utterance& u) const;

  TrainConfig cfg_;
  std::unique_ptr<AcousticModel<float>> model_;
  Rng data_rng_, dropout_rng_, window_rng_;
  std::size_t step_ = 0;
  std::vector<StepRecord> history_;
};

/// The utterances a system trains on: everything for multi-singer systems,
/// only singer 0 (relabelled as the single singer) otherwise.
std::vector<const Utterance*> training_pool(const Corpus& corpus, const SystemConfig& system);

/// Throws ConfigError when the model cannot consume the corpus (feature
/// layout, vocabularies or singer count).
void check_compatible(const TrainConfig& cfg, const CorpusSpec& corpus);

/// Runs `steps` train_step calls on batches drawn from `pool`.
void run_training(Trainer& trainer, std::span<const Utterance* const> pool, std::size_t steps,
                  const std::function<void(const StepRecord&)>& on_step = {});

/// Writes `step,L_G,L1_mgc,L1_bap,CE_vuv,L_adv_singer,L_adv_G,L_adv_D,L_total`.
void write_loss_csv(const std::filesystem::path& path, std::span<const StepRecord> history);
std::string loss_csv_header();
std::string loss_csv_row(const StepRecord& r);

}  // namespace asvs
