#include "asvs/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <json.hpp>

#include "asvs/config_io.hpp"
#include "asvs/score.hpp"

namespace asvs {

namespace {

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot write checkpoint " + path.string());
  }
  template <typename V>
  void pod(V v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void string(const std::string& s) {
    pod<std::uint64_t>(s.size());
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  template <typename V>
  void array(const V* data, std::size_t n) {
    out_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(V)));
  }
  void raw(const char* s, std::size_t n) { out_.write(s, static_cast<std::streamsize>(n)); }

 private:
  std::ofstream out_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw ValidationError("cannot open checkpoint " + path.string());
  }
  template <typename V>
  V pod() {
    V v{};
    get(reinterpret_cast<char*>(&v), sizeof v);
    return v;
  }
  std::string string() {
    const auto n = pod<std::uint64_t>();
    if (n > (1u << 30)) throw ValidationError(path_.string() + ": corrupt string length");
    std::string s(n, '\0');
    get(s.data(), n);
    return s;
  }
  template <typename V>
  void array(V* data, std::size_t n) {
    get(reinterpret_cast<char*>(data), n * sizeof(V));
  }
  void get(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n)
      throw ValidationError(path_.string() + ": truncated checkpoint");
  }

 private:
  std::ifstream in_;
  std::filesystem::path path_;
};

void write_group(Writer& w, const ParameterStore<float>& store) {
  const auto params = store.parameters();
  w.pod<std::uint64_t>(params.size());
  for (const auto* p : params) {
    w.string(p->name);
    w.pod<std::uint32_t>(static_cast<std::uint32_t>(p->tensor.rank()));
    for (auto d : p->tensor.shape()) w.pod<std::uint64_t>(d);
    w.pod<std::int64_t>(p->step);
    const std::size_t n = p->tensor.size();
    w.array(p->tensor.data().data(), n);
    w.array(p->first_moment.data(), n);
    w.array(p->second_moment.data(), n);
  }
  const auto& buffers = store.buffers();
  w.pod<std::uint64_t>(buffers.size());
  for (const auto& b : buffers) {
    w.string(b->name);
    w.pod<std::uint64_t>(b->values.size());
    w.array(b->values.data(), b->values.size());
  }
}

void read_group(Reader& r, ParameterStore<float>& store, const char* group) {
  const auto params = store.parameters();
  const auto count = r.pod<std::uint64_t>();
  if (count != params.size())
    throw ValidationError(std::string(group) + ": checkpoint has " + std::to_string(count) +
                          " parameters, model has " + std::to_string(params.size()));
  for (auto* p : params) {
    const auto name = r.string();
    if (name != p->name)
      throw ValidationError(std::string(group) + ": expected parameter '" + p->name +
                            "', found '" + name + "'");
    Shape shape(r.pod<std::uint32_t>());
    for (auto& d : shape) d = r.pod<std::uint64_t>();
    if (shape != p->tensor.shape())
      throw ValidationError(name + ": checkpoint shape " + shape_str(shape) + " vs model " +
                            shape_str(p->tensor.shape()));
    p->step = r.pod<std::int64_t>();
    const std::size_t n = p->tensor.size();
    r.array(p->tensor.mutable_data().data(), n);
    r.array(p->first_moment.data(), n);
    r.array(p->second_moment.data(), n);
  }
  const auto nbuf = r.pod<std::uint64_t>();
  if (nbuf != store.buffers().size())
    throw ValidationError(std::string(group) + ": buffer count mismatch");
  for (const auto& b : store.buffers()) {
    const auto name = r.string();
    const auto n = r.pod<std::uint64_t>();
    if (name != b->name || n != b->values.size())
      throw ValidationError(std::string(group) + ": buffer '" + name + "' does not match '" +
                            b->name + "'");
    r.array(b->values.data(), n);
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Trainer& trainer) {
  const PitchVocabulary pitch_map;
  nlohmann::json meta;
  meta["config"] = nlohmann::json::parse(dump_train_config(trainer.config()));
  meta["step"] = trainer.step();
  meta["pitch_map"] = {{"midi_offset", pitch_map.midi_offset}, {"size", pitch_map.size}};
  meta["value_type"] = "float32";
  const std::string text = meta.dump();

  Writer w(path);
  w.raw(kCheckpointMagic, sizeof kCheckpointMagic - 1);
  w.raw("\n", 1);
  w.string(text);
  const auto& model = trainer.model();
  write_group(w, model.generator_store());
  write_group(w, model.discriminator_store());
}

std::unique_ptr<Trainer> load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  char magic[sizeof kCheckpointMagic] = {};
  r.get(magic, sizeof kCheckpointMagic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof kCheckpointMagic - 1) != 0 ||
      magic[sizeof kCheckpointMagic - 1] != '\n')
    throw ValidationError(path.string() + ": not an ASVS-CKPT-1 checkpoint");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(r.string());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": bad metadata: " + e.what());
  }
  const PitchVocabulary pitch_map;
  if (meta.at("pitch_map").at("midi_offset") != pitch_map.midi_offset ||
      meta.at("pitch_map").at("size") != pitch_map.size)
    throw ValidationError(path.string() + ": checkpoint uses a different pitch map");
  auto trainer = std::make_unique<Trainer>(parse_train_config(meta.at("config").dump()));
  trainer->set_step(meta.at("step").get<std::size_t>());
  read_group(r, trainer->model().generator_store(), "generator");
  read_group(r, trainer->model().discriminator_store(), "discriminator");
  return trainer;
}

}  // namespace asvs
