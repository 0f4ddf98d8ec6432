#include "asvs/config_io.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace asvs {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : obj.items())
    if (!known.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

template <typename V>
void read(const json& obj, const char* key, V& out) {
  if (obj.contains(key)) out = obj.at(key).get<V>();
}

json model_to_json(const ModelConfig& m) {
  return {{"phoneme_vocab", m.phoneme_vocab},
          {"pitch_vocab", m.pitch_vocab},
          {"n_singers", m.n_singers},
          {"embed_dim", m.embed_dim},
          {"singer_dim", m.singer_dim},
          {"encoder_hidden1", m.encoder_hidden1},
          {"encoder_hidden2", m.encoder_hidden2},
          {"encoder_glu_blocks", m.encoder_glu_blocks},
          {"decoder_layers", m.decoder_layers},
          {"attention_before_glu", m.attention_before_glu},
          {"n_mgc", m.n_mgc},
          {"n_bap", m.n_bap},
          {"kernel", m.kernel},
          {"residual_scale", m.residual_scale},
          {"dropout", m.dropout},
          {"classifier_channels", m.classifier_channels},
          {"window_sizes", m.window_sizes},
          {"disc_channels", m.disc_channels},
          {"disc_kernels", m.disc_kernels},
          {"power_iterations", m.power_iterations},
          {"embedding_init", m.embedding_init}};
}

ModelConfig model_from_json(const json& j) {
  reject_unknown(j, {"phoneme_vocab", "pitch_vocab", "n_singers", "embed_dim", "singer_dim",
                     "encoder_hidden1", "encoder_hidden2", "encoder_glu_blocks",
                     "decoder_layers", "attention_before_glu", "n_mgc", "n_bap", "kernel",
                     "residual_scale", "dropout", "classifier_channels", "window_sizes",
                     "disc_channels", "disc_kernels", "power_iterations", "embedding_init"},
                 "model");
  ModelConfig m;
  read(j, "phoneme_vocab", m.phoneme_vocab);
  read(j, "pitch_vocab", m.pitch_vocab);
  read(j, "n_singers", m.n_singers);
  read(j, "embed_dim", m.embed_dim);
  read(j, "singer_dim", m.singer_dim);
  read(j, "encoder_hidden1", m.encoder_hidden1);
  read(j, "encoder_hidden2", m.encoder_hidden2);
  read(j, "encoder_glu_blocks", m.encoder_glu_blocks);
  read(j, "decoder_layers", m.decoder_layers);
  read(j, "attention_before_glu", m.attention_before_glu);
  read(j, "n_mgc", m.n_mgc);
  read(j, "n_bap", m.n_bap);
  read(j, "kernel", m.kernel);
  read(j, "residual_scale", m.residual_scale);
  read(j, "dropout", m.dropout);
  read(j, "classifier_channels", m.classifier_channels);
  read(j, "window_sizes", m.window_sizes);
  read(j, "disc_channels", m.disc_channels);
  read(j, "disc_kernels", m.disc_kernels);
  read(j, "power_iterations", m.power_iterations);
  read(j, "embedding_init", m.embedding_init);
  return m;
}

json system_to_json(const SystemConfig& s) {
  return {{"id", s.system_id},
          {"multi_singer", s.multi_singer},
          {"use_classifier", s.use_classifier},
          {"use_mrwds", s.use_mrwds},
          {"weights", {s.weights.generation, s.weights.singer, s.weights.adversarial}}};
}

SystemConfig system_from_json(const json& j) {
  if (j.is_number_integer()) return system_preset(j.get<int>());
  reject_unknown(j, {"id", "multi_singer", "use_classifier", "use_mrwds", "weights"}, "system");
  // An object starts from its preset (when an id is given) and overrides fields.
  SystemConfig s = j.contains("id") ? system_preset(j.at("id").get<int>()) : SystemConfig{};
  read(j, "multi_singer", s.multi_singer);
  read(j, "use_classifier", s.use_classifier);
  read(j, "use_mrwds", s.use_mrwds);
  if (j.contains("weights")) {
    const auto w = j.at("weights").get<std::vector<double>>();
    if (w.size() != 3) throw ConfigError("system.weights needs [lambda_G, lambda_S, lambda_D]");
    s.weights = {w[0], w[1], w[2]};
  }
  return s;
}

TrainConfig from_json(const json& j) {
  reject_unknown(j, {"system", "model", "optimizer", "batch_size", "steps", "seed",
                     "lambda_grl", "clip_norm", "non_saturating", "per_disc_logistic",
                     "freeze_generator", "data", "checkpoint_every"},
                 "training config");
  TrainConfig c;
  if (j.contains("system")) c.system = system_from_json(j.at("system"));
  if (j.contains("model")) c.model = model_from_json(j.at("model"));
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    reject_unknown(o, {"lr", "beta1", "beta2", "epsilon"}, "optimizer");
    read(o, "lr", c.adam.lr);
    read(o, "beta1", c.adam.beta1);
    read(o, "beta2", c.adam.beta2);
    read(o, "epsilon", c.adam.epsilon);
  }
  read(j, "batch_size", c.batch_size);
  read(j, "steps", c.steps);
  read(j, "seed", c.seed);
  read(j, "lambda_grl", c.lambda_grl);
  read(j, "clip_norm", c.clip_norm);
  read(j, "non_saturating", c.non_saturating);
  read(j, "per_disc_logistic", c.per_disc_logistic);
  read(j, "freeze_generator", c.freeze_generator);
  read(j, "checkpoint_every", c.checkpoint_every);
  if (j.contains("data")) {
    const auto& d = j.at("data");
    reject_unknown(d, {"corpus", "out"}, "data");
    read(d, "corpus", c.corpus_dir);
    read(d, "out", c.out_dir);
  }
  return c;
}

json to_json(const TrainConfig& c) {
  return {{"system", system_to_json(c.system)},
          {"model", model_to_json(c.model)},
          {"optimizer",
           {{"lr", c.adam.lr},
            {"beta1", c.adam.beta1},
            {"beta2", c.adam.beta2},
            {"epsilon", c.adam.epsilon}}},
          {"batch_size", c.batch_size},
          {"steps", c.steps},
          {"seed", c.seed},
          {"lambda_grl", c.lambda_grl},
          {"clip_norm", c.clip_norm},
          {"non_saturating", c.non_saturating},
          {"per_disc_logistic", c.per_disc_logistic},
          {"freeze_generator", c.freeze_generator},
          {"checkpoint_every", c.checkpoint_every},
          {"data", {{"corpus", c.corpus_dir}, {"out", c.out_dir}}}};
}

}  // namespace

TrainConfig parse_train_config(const std::string& text) {
  try {
    TrainConfig cfg = from_json(json::parse(text));
    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("training config: ") + e.what());
  }
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_train_config(ss.str());
}

std::string dump_train_config(const TrainConfig& cfg) { return to_json(cfg).dump(2); }

std::uint64_t config_hash(const TrainConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : to_json(cfg).dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string model_config_json(const ModelConfig& cfg) { return model_to_json(cfg).dump(); }

ModelConfig parse_model_config(const std::string& text) {
  try {
    return model_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
}

CorpusSpec parse_corpus_spec(const std::string& text) {
  try {
    const auto j = json::parse(text);
    reject_unknown(j, {"n_singers", "songs_per_singer", "song_scale", "min_phonemes",
                       "max_phonemes", "min_duration", "max_duration", "max_frames",
                       "phoneme_vocab", "pitch_vocab", "n_mgc", "n_bap", "unbalance",
                       "eval_fraction", "seed"},
                   "corpus spec");
    CorpusSpec s;
    if (j.contains("song_scale"))
      s.songs_per_singer = CorpusSpec::scaled_song_counts(j.at("song_scale").get<double>());
    read(j, "n_singers", s.n_singers);
    read(j, "songs_per_singer", s.songs_per_singer);
    read(j, "min_phonemes", s.min_phonemes);
    read(j, "max_phonemes", s.max_phonemes);
    read(j, "min_duration", s.min_duration);
    read(j, "max_duration", s.max_duration);
    read(j, "max_frames", s.max_frames);
    read(j, "phoneme_vocab", s.phoneme_vocab);
    read(j, "pitch_vocab", s.pitch_vocab);
    read(j, "n_mgc", s.n_mgc);
    read(j, "n_bap", s.n_bap);
    read(j, "unbalance", s.unbalance);
    read(j, "eval_fraction", s.eval_fraction);
    read(j, "seed", s.seed);
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("corpus spec: ") + e.what());
  }
}

CorpusSpec load_corpus_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open corpus spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_corpus_spec(ss.str());
}

}  // namespace asvs
