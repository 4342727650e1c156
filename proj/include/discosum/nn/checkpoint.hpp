#pragma once

// Checkpoint: one JSON document
//   {"format": 1, "config": {...}, "vocab": [str],
//    "frozen": [str], "params": {name: {"shape": [...], "data": [...]}}}

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "discosum/nn/model.hpp"

namespace discosum::nn {

inline constexpr int kCheckpointFormat = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json config_to_json(const ModelConfig& c) {
  return {{"hidden", c.hidden},
          {"feed_forward", c.feed_forward},
          {"layers", c.layers},
          {"dropout", c.dropout},
          {"ln_epsilon", c.ln_epsilon},
          {"graphs", to_string(c.graphs)},
          {"rst_directed_messages", c.rst_directed_messages},
          {"seed", c.seed}};
}

/// Fields absent from `j` keep their value in `base`.
inline ModelConfig config_from_json(const nlohmann::json& j, ModelConfig base = {}) {
  if (!j.is_object()) throw CheckpointError("model config must be a JSON object");
  auto get = [&](const char* key, auto& field) {
    if (auto it = j.find(key); it != j.end()) it->get_to(field);
  };
  get("hidden", base.hidden);
  get("feed_forward", base.feed_forward);
  get("layers", base.layers);
  get("dropout", base.dropout);
  get("ln_epsilon", base.ln_epsilon);
  get("rst_directed_messages", base.rst_directed_messages);
  get("seed", base.seed);
  if (auto it = j.find("graphs"); it != j.end()) base.graphs = parse_graph_mode(it->get<std::string>());
  return base;
}

template <std::floating_point T>
nlohmann::json checkpoint_to_json(const Model<T>& model) {
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, t] : model.params.tensors())
    params[name] = {{"shape", t.shape()}, {"data", t.values()}};
  nlohmann::json frozen = nlohmann::json::array();
  for (const auto& name : model.params.frozen_names()) frozen.push_back(name);
  return {{"format", kCheckpointFormat},
          {"config", config_to_json(model.config)},
          {"vocab", model.vocab.tokens()},
          {"frozen", frozen},
          {"params", params}};
}

template <std::floating_point T>
Model<T> checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<int>() != kCheckpointFormat)
      throw CheckpointError("unsupported checkpoint format " + j.at("format").dump());
    Model<T> m;
    m.config = config_from_json(j.at("config"));
    m.config.validate();
    m.vocab = Vocabulary::from_tokens(j.at("vocab").get<std::vector<std::string>>());
    for (const auto& [name, entry] : j.at("params").items()) {
      m.params.set(name, Tensor<T>(entry.at("shape").template get<Shape>(),
                                   entry.at("data").template get<std::vector<T>>()));
    }
    if (auto it = j.find("frozen"); it != j.end())
      for (const auto& name : *it) m.params.freeze(name.get<std::string>());
    if (m.params.at("embed").rows() != m.vocab.size())
      throw CheckpointError("embedding rows do not match vocabulary size");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  }
}

template <std::floating_point T>
void save_checkpoint(const std::string& path, const Model<T>& model) {
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint '" + path + "'");
  out << checkpoint_to_json(model).dump() << '\n';
}

template <std::floating_point T>
Model<T> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError("checkpoint '" + path + "' is not valid JSON: " + e.what());
  }
  return checkpoint_from_json<T>(j);
}

}  // namespace discosum::nn
