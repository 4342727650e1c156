#pragma once

// EDU scorer: token embeddings -> self-attentive span extractor -> stacked
// discourse graph encoders (one stack per graph) -> optional fusion ->
// logistic classifier.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "discosum/document.hpp"
#include "discosum/graphs.hpp"
#include "discosum/nn/params.hpp"
#include "discosum/nn/tape.hpp"
#include "discosum/rst.hpp"

namespace discosum::nn {

/// Token -> row index. Row 0 is always the unknown token.
class Vocabulary {
 public:
  static constexpr const char* kUnknown = "<unk>";

  Vocabulary() { add(kUnknown); }

  /// Sorted distinct tokens of `docs`, after the unknown token.
  static Vocabulary from_documents(std::span<const Document> docs) {
    std::set<std::string> seen;
    for (const auto& d : docs) seen.insert(d.tokens.begin(), d.tokens.end());
    Vocabulary v;
    for (const auto& t : seen) v.add(t);
    return v;
  }

  static Vocabulary from_tokens(const std::vector<std::string>& tokens) {
    Vocabulary v;
    for (const auto& t : tokens) v.add(t);
    return v;
  }

  std::size_t add(const std::string& token) {
    auto [it, inserted] = index_.emplace(token, tokens_.size());
    if (inserted) tokens_.push_back(token);
    return it->second;
  }

  std::size_t lookup(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? 0 : it->second;
  }

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

class EmbeddingFileError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed vectors in text form: one `token v_1 ... v_d` line per row.
template <std::floating_point T>
struct FixedEmbeddings {
  Vocabulary vocab;
  Tensor<T> table;
};

template <std::floating_point T>
void save_embedding_file(const std::string& path, const Vocabulary& vocab, const Tensor<T>& table) {
  std::ofstream out(path);
  if (!out) throw EmbeddingFileError("cannot write embedding file '" + path + "'");
  out << std::setprecision(std::numeric_limits<T>::max_digits10);
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    out << vocab.tokens()[r];
    for (T v : table.row(r)) out << ' ' << v;
    out << '\n';
  }
}

/// Loads fixed vectors. A missing `<unk>` row is added as zeros at row 0.
template <std::floating_point T>
FixedEmbeddings<T> load_embedding_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw EmbeddingFileError("embedding file '" + path + "' not found");
  std::vector<std::string> tokens;
  std::vector<std::vector<T>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    std::vector<T> row;
    std::string num;
    while (ss >> num) {
      double v = 0;
      auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
      if (ec != std::errc() || p != num.data() + num.size())
        throw EmbeddingFileError(path + ":" + std::to_string(line_no) + ": bad number '" + num + "'");
      row.push_back(static_cast<T>(v));
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw EmbeddingFileError(path + ":" + std::to_string(line_no) + ": inconsistent dimension");
    if (row.empty()) throw EmbeddingFileError(path + ":" + std::to_string(line_no) + ": no values");
    tokens.push_back(token);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw EmbeddingFileError("embedding file '" + path + "' is empty");
  const std::size_t d = rows.front().size();
  FixedEmbeddings<T> out;
  std::vector<T> data(d, T(0));  // row 0: <unk>
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    if (tokens[r] == Vocabulary::kUnknown) {
      std::copy(rows[r].begin(), rows[r].end(), data.begin());
      continue;
    }
    if (out.vocab.lookup(tokens[r]) != 0) continue;  // first occurrence wins
    out.vocab.add(tokens[r]);
    data.insert(data.end(), rows[r].begin(), rows[r].end());
  }
  out.table = Tensor<T>({out.vocab.size(), d}, std::move(data));
  return out;
}

/// Per-document model input: token ids, EDU spans and graph neighborhoods.
struct DocumentInput {
  std::vector<std::size_t> token_ids;
  std::vector<TokenSpan> spans;
  NeighborLists coref;
  NeighborLists rst;
  DependencyTree dependencies;

  std::size_t edu_count() const { return spans.size(); }
};

inline DocumentInput prepare_input(const Document& doc, const Vocabulary& vocab,
                                   bool rst_directed_messages = false) {
  DocumentInput in;
  in.token_ids.reserve(doc.tokens.size());
  for (const auto& t : doc.tokens) in.token_ids.push_back(vocab.lookup(t));
  for (const auto& e : doc.edus) in.spans.push_back(e.span());
  in.dependencies = document_dependencies(doc);
  in.coref = message_view(build_coref_graph(doc));
  in.rst = message_view(build_rst_graph(in.dependencies), rst_directed_messages);
  return in;
}

template <std::floating_point T>
struct Model {
  ModelConfig config;
  Vocabulary vocab;
  ParamStore<T> params;

  static Model create(const ModelConfig& config, Vocabulary vocab) {
    Rng rng(config.seed);
    Model m{config, std::move(vocab), {}};
    m.params = init_params<T>(config, m.vocab.size(), rng);
    return m;
  }

  /// Model over fixed, frozen embedding vectors. Their width must equal the
  /// hidden size.
  static Model create(const ModelConfig& config, FixedEmbeddings<T> fixed) {
    if (fixed.table.cols() != config.hidden)
      throw std::invalid_argument("embedding dimension " + std::to_string(fixed.table.cols()) +
                                  " does not match hidden size " + std::to_string(config.hidden));
    Model m = create(config, fixed.vocab);
    m.params.set("embed", std::move(fixed.table));
    m.params.freeze("embed");
    return m;
  }

  DocumentInput prepare(const Document& doc) const {
    return prepare_input(doc, vocab, config.rst_directed_messages);
  }
};

/// Binds a parameter on the tape, honoring its frozen flag.
template <typename T>
Var bind_param(Tape<T>& tape, const ParamStore<T>& params, const std::string& name) {
  return tape.param(name, params.at(name), !params.frozen(name));
}

/// h^B: one embedding row per token.
template <typename T>
Var embed_tokens(Tape<T>& tape, const ParamStore<T>& params, const std::vector<std::size_t>& token_ids) {
  return ops::gather_rows(tape, bind_param(tape, params, "embed"), token_ids);
}

/// h^S: per-EDU attention pooling over its tokens, with token scores
/// alpha = W2 ReLU(W1 h + b1) + b2.
template <typename T>
Var span_extract(Tape<T>& tape, const ParamStore<T>& params, Var tokens, const std::vector<TokenSpan>& spans) {
  Var hidden = ops::relu(tape, ops::linear(tape, tokens, bind_param(tape, params, "span.w1"), bind_param(tape, params, "span.b1")));
  Var scores = ops::linear(tape, hidden, bind_param(tape, params, "span.w2"), bind_param(tape, params, "span.b2"));
  return ops::span_softmax_pool(tape, tokens, scores, spans);
}

/// One discourse graph encoder block:
///   u = W4 ReLU(W3 h + b3) + b4
///   v = LN1(h + Dropout(u))
///   w = ReLU(mean_{j in N_i} W5 v_j + b5)    (b5 added once; empty N_i -> ReLU(b5))
///   h' = LN2(Dropout(w) + v)
/// `rng` null means evaluation mode.
template <typename T>
Var dge_layer_forward(Tape<T>& tape, const ParamStore<T>& params, const std::string& prefix, Var h,
                      const NeighborLists& neighbors, const ModelConfig& config, Rng* rng) {
  auto p = [&](const char* n) { return bind_param(tape, params, prefix + n); };
  Var ff = ops::relu(tape, ops::linear(tape, h, p("w3"), p("b3")));
  Var u = ops::linear(tape, ff, p("w4"), p("b4"));
  Var v = ops::layer_norm(tape, ops::add(tape, h, ops::dropout(tape, u, config.dropout, rng)), p("ln1.gain"),
                          p("ln1.bias"), config.ln_epsilon);
  Var agg = ops::neighbor_mean(tape, v, neighbors);
  Var w = ops::relu(tape, ops::linear(tape, agg, p("w5"), p("b5")));
  return ops::layer_norm(tape, ops::add(tape, ops::dropout(tape, w, config.dropout, rng), v), p("ln2.gain"),
                         p("ln2.bias"), config.ln_epsilon);
}

template <typename T>
Var dge_stack(Tape<T>& tape, const ParamStore<T>& params, const std::string& graph, Var h,
              const NeighborLists& neighbors, const ModelConfig& config, Rng* rng) {
  for (std::size_t k = 0; k < config.layers; ++k)
    h = dge_layer_forward(tape, params, dge_prefix(graph, k), h, neighbors, config, rng);
  return h;
}

/// h^G = ReLU(W6 [h_C ; h_R] + b6).
template <typename T>
Var fuse_graphs(Tape<T>& tape, const ParamStore<T>& params, Var coref, Var rst) {
  return ops::relu(tape, ops::linear(tape, ops::concat_cols(tape, coref, rst), bind_param(tape, params, "fusion.w6"),
                                     bind_param(tape, params, "fusion.b6")));
}

/// y = sigmoid(W7 h + b7), n x 1.
template <typename T>
Var predict_scores(Tape<T>& tape, const ParamStore<T>& params, Var h) {
  return ops::sigmoid(tape, ops::linear(tape, h, bind_param(tape, params, "cls.w7"), bind_param(tape, params, "cls.b7")));
}

template <typename T>
Var bce_loss(Tape<T>& tape, Var probs, const std::vector<int>& labels, double eps = 1e-7) {
  std::vector<T> targets(labels.begin(), labels.end());
  return ops::binary_cross_entropy(tape, probs, std::move(targets), eps);
}

/// Graph-encoded EDU representation h^G for the configured graph mode.
template <typename T>
Var encode_document(Tape<T>& tape, const ParamStore<T>& params, const ModelConfig& config,
                    const DocumentInput& input, Rng* rng) {
  Var tokens = embed_tokens(tape, params, input.token_ids);
  Var hs = span_extract(tape, params, tokens, input.spans);
  switch (config.graphs) {
    case GraphMode::None: return hs;
    case GraphMode::Coref: return dge_stack(tape, params, "coref", hs, input.coref, config, rng);
    case GraphMode::Rst: return dge_stack(tape, params, "rst", hs, input.rst, config, rng);
    case GraphMode::Both: {
      Var hc = dge_stack(tape, params, "coref", hs, input.coref, config, rng);
      Var hr = dge_stack(tape, params, "rst", hs, input.rst, config, rng);
      return fuse_graphs(tape, params, hc, hr);
    }
  }
  return hs;
}

/// Evaluation-mode EDU probabilities.
template <typename T>
std::vector<double> score_document(const Model<T>& model, const DocumentInput& input) {
  Tape<T> tape;
  Var probs = predict_scores(tape, model.params, encode_document(tape, model.params, model.config, input, nullptr));
  const auto& v = tape.value(probs);
  return {v.data().begin(), v.data().end()};
}

/// BCE loss of one document; adds parameter gradients into `grads`. `rng`
/// enables dropout.
template <typename T>
T document_loss(const Model<T>& model, const DocumentInput& input, const std::vector<int>& labels,
                Rng* rng, std::type_identity_t<Gradients<T>>* grads) {
  if (labels.size() != input.edu_count()) throw std::invalid_argument("document_loss: label count mismatch");
  Tape<T> tape;
  Var probs = predict_scores(tape, model.params, encode_document(tape, model.params, model.config, input, rng));
  Var loss = bce_loss(tape, probs, labels);
  if (grads) {
    tape.backward(loss);
    tape.accumulate_param_grads(*grads);
  }
  return tape.value(loss)[0];
}

}  // namespace discosum::nn
