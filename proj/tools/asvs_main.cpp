// asvs: corpus generation, training, synthesis, evaluation and gradient checks.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "asvs/checkpoint.hpp"
#include "asvs/config_io.hpp"
#include "asvs/evaluation.hpp"
#include "asvs/gradcheck_suite.hpp"
#include "asvs/kernels.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kFailure = 1, kBadConfig = 2, kInvariant = 3 };

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_manifest(const fs::path& dir, const std::string& command, std::uint64_t hash,
                    std::uint64_t seed, const json& artifacts) {
  fs::create_directories(dir);
  json m;
  m["command"] = command;
  m["config_hash"] = hex(hash);
  m["seed"] = seed;
  m["versions"] = {{"asvs", kVersion},
                   {"checkpoint_format", asvs::kCheckpointMagic},
                   {"corpus_format", "asvs-corpus-1"},
                   {"compiler", __VERSION__}};
  m["threads"] = asvs::kernels::num_threads();
  m["artifacts"] = artifacts;
  std::ofstream(dir / "run_manifest.json") << m.dump(2) << "\n";
}

struct CommonOptions {
  std::string config;
  std::optional<int> system;
  std::optional<std::size_t> steps;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string corpus;
  std::string checkpoint;
};

asvs::TrainConfig resolve_train_config(const CommonOptions& o) {
  asvs::TrainConfig cfg = o.config.empty() ? asvs::TrainConfig{} : asvs::load_train_config(o.config);
  if (o.system) cfg.system = asvs::system_preset(*o.system);
  if (o.steps) cfg.steps = *o.steps;
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.corpus.empty()) cfg.corpus_dir = o.corpus;
  if (cfg.corpus_dir.empty()) throw asvs::ConfigError("no corpus given (--corpus or data.corpus)");
  cfg.validate();
  return cfg;
}

int cmd_gen_corpus(const CommonOptions& o, double scale, std::optional<double> unbalance) {
  asvs::CorpusSpec spec = o.config.empty() ? asvs::CorpusSpec{} : asvs::load_corpus_spec(o.config);
  if (scale > 0) spec.songs_per_singer = asvs::CorpusSpec::scaled_song_counts(scale);
  if (unbalance) spec.unbalance = *unbalance;
  if (o.seed) spec.seed = *o.seed;
  spec.validate();
  const fs::path out = o.out.empty() ? "corpus" : o.out;
  const auto corpus = asvs::generate_corpus(spec);
  asvs::write_corpus(out, corpus);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : std::string(std::istreambuf_iterator<char>(
           std::ifstream(out / "manifest.json").rdbuf()), {})) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  write_manifest(out, "gen-corpus", h, spec.seed, {"manifest.json", "scores/", "features/"});
  std::printf("wrote %zu utterances (%zu held out) to %s\n", corpus.utterances.size(),
              corpus.evaluation().size(), out.c_str());
  return kOk;
}

int cmd_train(const CommonOptions& o) {
  const auto cfg = resolve_train_config(o);
  const auto corpus = asvs::read_corpus(cfg.corpus_dir);
  asvs::check_compatible(cfg, corpus.spec);
  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  std::ofstream(out / "config.json") << asvs::dump_train_config(cfg) << "\n";

  asvs::Trainer trainer(cfg);
  const auto pool = asvs::training_pool(corpus, cfg.system);
  std::printf("%s, %zu training utterances, %zu generator / %zu discriminator parameters\n",
              asvs::describe(cfg.system).c_str(), pool.size(),
              trainer.model().generator_store().count(),
              trainer.model().discriminator_store().count());
  const auto start = std::chrono::steady_clock::now();
  asvs::run_training(trainer, pool, cfg.steps, [&](const asvs::StepRecord& r) {
    const std::size_t done = r.step + 1;
    if (done % 50 == 0 || done == cfg.steps) {
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::printf("step %zu  L_G %.5f  L_total %.5f  (%.1fs)\n", done, r.l_g, r.l_total, secs);
      std::fflush(stdout);
    }
    if (cfg.checkpoint_every && done % cfg.checkpoint_every == 0 && done != cfg.steps)
      asvs::save_checkpoint(out / ("checkpoint_" + std::to_string(done) + ".ckpt"), trainer);
  });
  asvs::write_loss_csv(out / "loss.csv", trainer.history());
  asvs::save_checkpoint(out / "checkpoint.ckpt", trainer);
  write_manifest(out, "train", asvs::config_hash(cfg), cfg.seed,
                 {"config.json", "loss.csv", "checkpoint.ckpt"});
  return kOk;
}

std::vector<const asvs::Utterance*> synthesis_targets(const asvs::Corpus& corpus,
                                                      const asvs::SystemConfig& system,
                                                      bool all) {
  std::vector<const asvs::Utterance*> out;
  for (const auto& u : corpus.utterances)
    if ((all || u.held_out) && (system.multi_singer || u.score.singer_id == 0)) out.push_back(&u);
  return out;
}

int cmd_synthesize(const CommonOptions& o, const std::string& score_file, bool all, bool csv) {
  if (o.checkpoint.empty()) throw asvs::ConfigError("synthesize needs --checkpoint");
  auto trainer = asvs::load_checkpoint(o.checkpoint);
  const auto& m = trainer->config().model;
  const fs::path out = o.out.empty() ? "synth" : o.out;
  fs::create_directories(out);
  json artifacts = json::array();
  auto emit = [&](const std::string& id, const asvs::ScoreSequence& score) {
    const auto frames = trainer->synthesize(score);
    const std::size_t n = score.total_frames();
    asvs::write_features(out / (id + ".feat"), frames, n, m.feature_dim());
    artifacts.push_back(id + ".feat");
    if (csv) {
      asvs::write_feature_dump(out / (id + ".csv"), frames, n, m.n_mgc, m.n_bap);
      artifacts.push_back(id + ".csv");
    }
  };
  if (!score_file.empty()) {
    emit(fs::path(score_file).stem().string(), asvs::read_score(score_file));
  } else {
    if (o.corpus.empty()) throw asvs::ConfigError("synthesize needs --score or --corpus");
    const auto corpus = asvs::read_corpus(o.corpus);
    for (const auto* u : synthesis_targets(corpus, trainer->config().system, all))
      emit(u->id, u->score);
  }
  write_manifest(out, "synthesize", asvs::config_hash(trainer->config()), trainer->config().seed,
                 artifacts);
  std::printf("wrote %zu feature file(s) to %s\n", artifacts.size(), out.c_str());
  return kOk;
}

int cmd_evaluate(const CommonOptions& o, const std::string& generated_dir) {
  if (o.corpus.empty()) throw asvs::ConfigError("evaluate needs --corpus");
  const auto corpus = asvs::read_corpus(o.corpus);
  std::unique_ptr<asvs::Trainer> trainer;
  if (!o.checkpoint.empty()) trainer = asvs::load_checkpoint(o.checkpoint);
  if (!trainer && generated_dir.empty())
    throw asvs::ConfigError("evaluate needs --checkpoint or --generated");
  const auto& spec = corpus.spec;
  const std::size_t dims = spec.feature_dim();
  const asvs::SystemConfig system =
      trainer ? trainer->config().system : asvs::system_preset(2);

  std::vector<std::vector<float>> generated, reference;
  for (const auto* u : synthesis_targets(corpus, system, false)) {
    reference.push_back(u->features);
    if (!generated_dir.empty()) {
      std::size_t frames = 0, d = 0;
      generated.push_back(asvs::read_features(fs::path(generated_dir) / (u->id + ".feat"),
                                              frames, d));
      if (d != dims || frames != u->frames)
        throw asvs::AlignmentError(u->id + ": generated features do not match the reference");
    } else {
      generated.push_back(trainer->synthesize(u->score));
    }
  }
  asvs::GvReport report;
  if (!reference.empty()) {
    report.generated = asvs::global_variance(generated, dims, spec.n_mgc);
    report.reference = asvs::global_variance(reference, dims, spec.n_mgc);
  }
  const fs::path out = o.out.empty() ? "eval" : o.out;
  fs::create_directories(out);
  asvs::write_gv_csv(out / "gv.csv", report);

  json summary;
  summary["utterances"] = reference.size();
  double gen_mean = 0, ref_mean = 0;
  for (std::size_t d = 0; d < report.generated.size(); ++d) {
    gen_mean += report.generated[d] / report.generated.size();
    ref_mean += report.reference[d] / report.reference.size();
  }
  summary["gv_mean_generated"] = gen_mean;
  summary["gv_mean_reference"] = ref_mean;

  if (trainer && system.multi_singer) {
    std::vector<std::vector<double>> pooled;
    std::vector<std::size_t> labels;
    for (const auto& u : corpus.utterances) {
      pooled.push_back(asvs::mean_pool(trainer->encode(u.score), trainer->config().model.embed_dim));
      labels.push_back(u.score.singer_id);
    }
    const auto probe = asvs::singer_probe(pooled, labels);
    summary["singer_probe_accuracy"] = probe.accuracy;
    summary["singer_probe_chance"] = 1.0 / static_cast<double>(probe.classes);
    std::printf("singer probe accuracy %.4f (chance %.4f)\n", probe.accuracy,
                1.0 / static_cast<double>(probe.classes));
  }
  std::ofstream(out / "evaluation.json") << summary.dump(2) << "\n";
  std::printf("GV mean generated %.6f, reference %.6f over %zu utterances\n", gen_mean, ref_mean,
              reference.size());
  write_manifest(out, "evaluate",
                 trainer ? asvs::config_hash(trainer->config()) : std::uint64_t{0},
                 trainer ? trainer->config().seed : 0, {"gv.csv", "evaluation.json"});
  return kOk;
}

int cmd_gradcheck(const CommonOptions& o) {
  const std::uint64_t seed = o.seed.value_or(1);
  auto results = asvs::primitive_gradchecks(seed);
  const auto composites = asvs::composite_gradchecks(seed);
  results.insert(results.end(), composites.begin(), composites.end());
  bool ok = true;
  std::printf("%-36s %14s %8s  %s\n", "check", "rel. error", "coords", "result");
  for (const auto& r : results) {
    std::printf("%-36s %14.3e %8zu  %s\n", r.name.c_str(), r.relative_error, r.checked,
                r.passed ? "PASS" : "FAIL");
    ok = ok && r.passed;
  }
  if (!o.out.empty()) write_manifest(o.out, "gradcheck", 0, seed, json::array());
  return ok ? kOk : kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* env = std::getenv("ASVS_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) asvs::kernels::set_num_threads(n);
  }

  CLI::App app{"Adversarially trained multi-singer sequence-to-sequence singing synthesis"};
  app.require_subcommand(1);
  CommonOptions o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file");
    sub->add_option("--seed", o.seed, "Seed override");
    sub->add_option("--out", o.out, "Output directory");
  };

  auto* gen = app.add_subcommand("gen-corpus", "Generate the synthetic multi-singer corpus");
  add_common(gen);
  double scale = 0;
  std::optional<double> unbalance;
  gen->add_option("--scale", scale, "Scale factor on the per-singer song counts");
  gen->add_option("--unbalance", unbalance, "Score-distribution unbalance in [0, 1]");

  auto* train = app.add_subcommand("train", "Train one system");
  add_common(train);
  train->add_option("--system", o.system, "System preset 1..5")->check(CLI::Range(1, 5));
  train->add_option("--steps", o.steps, "Number of training steps");
  train->add_option("--corpus", o.corpus, "Corpus directory");

  auto* synth = app.add_subcommand("synthesize", "Synthesize features from a checkpoint");
  add_common(synth);
  std::string score_file;
  bool all = false, csv = false;
  synth->add_option("--checkpoint", o.checkpoint, "Checkpoint file")->required();
  synth->add_option("--corpus", o.corpus, "Corpus whose held-out scores are synthesized");
  synth->add_option("--score", score_file, "Single score file");
  synth->add_flag("--all", all, "Synthesize every utterance, not only the held-out set");
  synth->add_flag("--csv", csv, "Also write frame-major CSV dumps");

  auto* eval = app.add_subcommand("evaluate", "Global variance and singer probe");
  add_common(eval);
  std::string generated_dir;
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint file");
  eval->add_option("--corpus", o.corpus, "Corpus directory")->required();
  eval->add_option("--generated", generated_dir, "Directory of generated .feat files");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  add_common(grad);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadConfig;
  }

  try {
    if (*gen) return cmd_gen_corpus(o, scale, unbalance);
    if (*train) return cmd_train(o);
    if (*synth) return cmd_synthesize(o, score_file, all, csv);
    if (*eval) return cmd_evaluate(o, generated_dir);
    if (*grad) return cmd_gradcheck(o);
  } catch (const asvs::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kBadConfig;
  } catch (const asvs::InvariantError& e) {
    std::fprintf(stderr, "invariant violated: %s\n", e.what());
    return kInvariant;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kFailure;
  }
  return kFailure;
}
