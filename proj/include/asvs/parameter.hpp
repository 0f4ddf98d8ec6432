#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "asvs/rng.hpp"
#include "asvs/tensor.hpp"

namespace asvs {

/// Trainable leaf tensor plus its Adam moments.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> tensor;
  std::vector<T> first_moment;
  std::vector<T> second_moment;
  std::int64_t step = 0;
};

/// Named, non-trainable state that must survive checkpoints (spectral-norm
/// singular vector estimates).
template <typename T>
struct Buffer {
  std::string name;
  std::vector<T> values;
};

/// Owns the parameters of one optimizer group (generator or discriminators).
/// Layers keep Tensor handles sharing the same nodes.
template <typename T>
class ParameterStore {
 public:
  ParameterStore() = default;
  ParameterStore(const ParameterStore&) = delete;
  ParameterStore& operator=(const ParameterStore&) = delete;

  Tensor<T> add(const std::string& name, Shape shape, std::vector<T> init) {
    if (find(name)) throw ConfigError("duplicate parameter name '" + name + "'");
    auto p = std::make_unique<Parameter<T>>();
    p->name = name;
    p->tensor = Tensor<T>(std::move(shape), std::move(init), true);
    p->first_moment.assign(p->tensor.size(), T(0));
    p->second_moment.assign(p->tensor.size(), T(0));
    params_.push_back(std::move(p));
    return params_.back()->tensor;
  }

  /// Uniform(-bound, bound) initialisation.
  Tensor<T> add_uniform(const std::string& name, Shape shape, double bound, Rng& rng) {
    std::vector<T> init(numel(shape));
    for (auto& v : init) v = static_cast<T>(rng.uniform(-bound, bound));
    return add(name, std::move(shape), std::move(init));
  }

  Tensor<T> add_zeros(const std::string& name, Shape shape) {
    const auto n = numel(shape);
    return add(name, std::move(shape), std::vector<T>(n, T(0)));
  }

  std::vector<T>& add_buffer(const std::string& name, std::vector<T> init) {
    for (auto& b : buffers_)
      if (b->name == name) throw ConfigError("duplicate buffer name '" + name + "'");
    buffers_.push_back(std::make_unique<Buffer<T>>(Buffer<T>{name, std::move(init)}));
    return buffers_.back()->values;
  }

  Parameter<T>* find(const std::string& name) const {
    for (auto& p : params_)
      if (p->name == name) return p.get();
    return nullptr;
  }

  Buffer<T>* find_buffer(const std::string& name) const {
    for (auto& b : buffers_)
      if (b->name == name) return b.get();
    return nullptr;
  }

  std::vector<Parameter<T>*> parameters() const {
    std::vector<Parameter<T>*> out;
    for (auto& p : params_) out.push_back(p.get());
    return out;
  }

  /// Parameters whose name starts with `prefix`.
  std::vector<Parameter<T>*> parameters(const std::string& prefix) const {
    std::vector<Parameter<T>*> out;
    for (auto& p : params_)
      if (p->name.rfind(prefix, 0) == 0) out.push_back(p.get());
    return out;
  }

  const std::vector<std::unique_ptr<Buffer<T>>>& buffers() const { return buffers_; }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto& p : params_) n += p->tensor.size();
    return n;
  }

  void zero_grad() {
    for (auto& p : params_) p->tensor.clear_grad();
  }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::vector<std::unique_ptr<Buffer<T>>> buffers_;
};

}  // namespace asvs
