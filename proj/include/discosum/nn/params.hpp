#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "discosum/nn/random.hpp"
#include "discosum/nn/tensor.hpp"

namespace discosum::nn {

enum class GraphMode { None, Coref, Rst, Both };

inline std::string to_string(GraphMode g) {
  switch (g) {
    case GraphMode::None: return "none";
    case GraphMode::Coref: return "coref";
    case GraphMode::Rst: return "rst";
    case GraphMode::Both: return "both";
  }
  return "none";
}

inline GraphMode parse_graph_mode(const std::string& s) {
  if (s == "none") return GraphMode::None;
  if (s == "coref") return GraphMode::Coref;
  if (s == "rst") return GraphMode::Rst;
  if (s == "both") return GraphMode::Both;
  throw std::invalid_argument("unknown graph mode '" + s + "' (expected none, coref, rst or both)");
}

inline bool uses_coref(GraphMode g) { return g == GraphMode::Coref || g == GraphMode::Both; }
inline bool uses_rst(GraphMode g) { return g == GraphMode::Rst || g == GraphMode::Both; }

struct ModelConfig {
  std::size_t hidden = 64;       // d_h
  std::size_t feed_forward = 128;  // d_ff
  std::size_t layers = 2;        // stacked DGE blocks per graph
  double dropout = 0.1;
  double ln_epsilon = 1e-5;
  GraphMode graphs = GraphMode::Both;
  bool rst_directed_messages = false;
  std::uint64_t seed = 0;

  void validate() const {
    if (hidden == 0) throw std::invalid_argument("ModelConfig: hidden size must be positive");
    if (feed_forward == 0) throw std::invalid_argument("ModelConfig: feed-forward size must be positive");
    if (!(dropout >= 0 && dropout < 1)) throw std::invalid_argument("ModelConfig: dropout must lie in [0, 1)");
    if (!(ln_epsilon > 0)) throw std::invalid_argument("ModelConfig: ln_epsilon must be positive");
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Named parameter tensors. Frozen tensors take part in the forward pass but
/// receive no gradient or update.
template <std::floating_point T>
class ParamStore {
 public:
  Tensor<T>& at(const std::string& name) {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw std::out_of_range("ParamStore: no parameter '" + name + "'");
    return it->second;
  }
  const Tensor<T>& at(const std::string& name) const {
    auto it = tensors_.find(name);
    if (it == tensors_.end()) throw std::out_of_range("ParamStore: no parameter '" + name + "'");
    return it->second;
  }

  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  void set(const std::string& name, Tensor<T> value) { tensors_[name] = std::move(value); }

  void freeze(const std::string& name) { frozen_.insert(name); }
  bool frozen(const std::string& name) const { return frozen_.count(name) != 0; }
  const std::set<std::string>& frozen_names() const { return frozen_; }

  const std::map<std::string, Tensor<T>>& tensors() const { return tensors_; }
  std::map<std::string, Tensor<T>>& tensors() { return tensors_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& [_, t] : tensors_) n += t.size();
    return n;
  }

  friend bool operator==(const ParamStore&, const ParamStore&) = default;

 private:
  std::map<std::string, Tensor<T>> tensors_;
  std::set<std::string> frozen_;
};

inline std::string dge_prefix(const std::string& graph, std::size_t layer) {
  return "dge." + graph + "." + std::to_string(layer) + ".";
}

/// Fresh parameters for `config` and a vocabulary of `vocab_size` rows.
/// Weights and biases are drawn uniform(-1/sqrt(fan_in), 1/sqrt(fan_in));
/// embedding rows use fan_in = 1; layer-norm gains start at 1 and biases at 0.
/// Creation order is fixed so one seed gives one parameter set.
template <std::floating_point T>
ParamStore<T> init_params(const ModelConfig& config, std::size_t vocab_size, Rng& rng) {
  config.validate();
  ParamStore<T> p;
  auto uniform = [&](const std::string& name, Shape shape, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Tensor<T> t(std::move(shape));
    for (auto& v : t.data()) v = static_cast<T>(rng.uniform(-bound, bound));
    p.set(name, std::move(t));
  };
  const std::size_t d = config.hidden, ff = config.feed_forward;

  uniform("embed", {vocab_size, d}, 1);
  uniform("span.w1", {ff, d}, d);
  uniform("span.b1", {ff}, d);
  uniform("span.w2", {1, ff}, ff);
  uniform("span.b2", {1}, ff);

  for (const char* graph : {"coref", "rst"}) {
    const bool on = std::string(graph) == "coref" ? uses_coref(config.graphs) : uses_rst(config.graphs);
    if (!on) continue;
    for (std::size_t k = 0; k < config.layers; ++k) {
      const std::string pre = dge_prefix(graph, k);
      uniform(pre + "w3", {ff, d}, d);
      uniform(pre + "b3", {ff}, d);
      uniform(pre + "w4", {d, ff}, ff);
      uniform(pre + "b4", {d}, ff);
      uniform(pre + "w5", {d, d}, d);
      uniform(pre + "b5", {d}, d);
      p.set(pre + "ln1.gain", Tensor<T>({d}, T(1)));
      p.set(pre + "ln1.bias", Tensor<T>({d}, T(0)));
      p.set(pre + "ln2.gain", Tensor<T>({d}, T(1)));
      p.set(pre + "ln2.bias", Tensor<T>({d}, T(0)));
    }
  }
  if (config.graphs == GraphMode::Both) {
    uniform("fusion.w6", {d, 2 * d}, 2 * d);
    uniform("fusion.b6", {d}, 2 * d);
  }
  uniform("cls.w7", {1, d}, d);
  uniform("cls.b7", {1}, d);
  return p;
}

}  // namespace discosum::nn
