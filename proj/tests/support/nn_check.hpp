#pragma once

// Comparisons of the tape-based model against the dense references, and a
// central finite-difference gradient check. Shared by the unit tests and
// the acceptance binary.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "discosum/nn/model.hpp"
#include "support/reference.hpp"

namespace discosum::testing {

inline double max_abs_diff(const Mat& a, const Mat& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::abs(a[i][j] - b[i][j]));
  return m;
}

inline double max_abs_diff(const Vec& a, const Vec& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Random model inputs: `n` EDUs over `tokens` positions, random spans and
/// random (possibly empty) neighbor lists.
struct RandomCase {
  nn::ModelConfig config;
  std::vector<TokenSpan> spans;
  std::vector<std::size_t> token_ids;
  std::vector<std::vector<std::size_t>> coref, rst;
  std::size_t vocab = 0;
};

inline std::vector<std::vector<std::size_t>> random_neighbors(nn::Rng& rng, std::size_t n, bool self) {
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if ((self && i == j) || rng.uniform() < 0.3) out[i].push_back(j);
  return out;
}

inline RandomCase random_case(nn::Rng& rng) {
  RandomCase c;
  c.config.hidden = 2 + rng.below(7);
  c.config.feed_forward = 2 + rng.below(9);
  c.config.layers = 1 + rng.below(3);
  c.config.dropout = 0;
  c.config.seed = rng.next();
  c.config.ln_epsilon = 1e-5;
  const std::size_t n = 1 + rng.below(6);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = 1 + rng.below(4);
    c.spans.push_back({pos, pos + len});
    pos += len;
  }
  c.vocab = 3 + rng.below(10);
  for (std::size_t t = 0; t < pos; ++t) c.token_ids.push_back(rng.below(c.vocab));
  c.coref = random_neighbors(rng, n, true);
  c.rst = random_neighbors(rng, n, false);
  return c;
}

inline DgeWeights dge_weights(const nn::ParamStore<double>& p, const std::string& pre) {
  DgeWeights w;
  w.w3 = to_mat(p.at(pre + "w3"));
  w.w4 = to_mat(p.at(pre + "w4"));
  w.w5 = to_mat(p.at(pre + "w5"));
  w.b3 = to_vec(p.at(pre + "b3"));
  w.b4 = to_vec(p.at(pre + "b4"));
  w.b5 = to_vec(p.at(pre + "b5"));
  w.g1 = to_vec(p.at(pre + "ln1.gain"));
  w.c1 = to_vec(p.at(pre + "ln1.bias"));
  w.g2 = to_vec(p.at(pre + "ln2.gain"));
  w.c2 = to_vec(p.at(pre + "ln2.bias"));
  return w;
}

/// Perturbs layer-norm gains and biases away from 1 and 0 so the reference
/// comparison exercises them.
inline void jitter_norms(nn::ParamStore<double>& p, nn::Rng& rng) {
  for (auto& [name, t] : p.tensors())
    if (name.find(".ln") != std::string::npos)
      for (auto& v : t.data()) v += rng.uniform(-0.5, 0.5);
}

struct ForwardErrors {
  double span = 0, dge = 0, fuse = 0, predict = 0;
};

/// Runs the four forward blocks of one random case on the tape and against
/// the dense references.
inline ForwardErrors compare_forward(const RandomCase& c, nn::Rng& rng) {
  using namespace nn;
  ModelConfig cfg = c.config;
  cfg.graphs = GraphMode::Both;
  ParamStore<double> p;
  {
    Rng init(cfg.seed);
    p = init_params<double>(cfg, c.vocab, init);
  }
  jitter_norms(p, rng);
  ForwardErrors err;

  Tape<double> tape;
  Var tok = embed_tokens(tape, p, c.token_ids);
  Var hs = span_extract(tape, p, tok, c.spans);
  const Mat tokens = to_mat(tape.value(tok));
  Mat ref_hs;
  for (const auto& s : c.spans)
    ref_hs.push_back(span_extract(tokens, s, to_mat(p.at("span.w1")), to_vec(p.at("span.b1")),
                                  to_mat(p.at("span.w2")), to_vec(p.at("span.b2"))));
  err.span = max_abs_diff(to_mat(tape.value(hs)), ref_hs);

  const Mat hs_m = to_mat(tape.value(hs));
  Var hc = hs, hr = hs;
  Mat ref_c = hs_m, ref_r = hs_m;
  for (std::size_t k = 0; k < cfg.layers; ++k) {
    hc = dge_layer_forward(tape, p, dge_prefix("coref", k), hc, c.coref, cfg, nullptr);
    hr = dge_layer_forward(tape, p, dge_prefix("rst", k), hr, c.rst, cfg, nullptr);
    // The reference chains its own outputs; in f64 drift stays far below tolerance.
    ref_c = dge_layer(ref_c, c.coref, dge_weights(p, dge_prefix("coref", k)), cfg.ln_epsilon);
    ref_r = dge_layer(ref_r, c.rst, dge_weights(p, dge_prefix("rst", k)), cfg.ln_epsilon);
    err.dge = std::max({err.dge, max_abs_diff(to_mat(tape.value(hc)), ref_c),
                        max_abs_diff(to_mat(tape.value(hr)), ref_r)});
  }

  Var hg = fuse_graphs(tape, p, hc, hr);
  const Mat ref_g =
      fuse(to_mat(tape.value(hc)), to_mat(tape.value(hr)), to_mat(p.at("fusion.w6")), to_vec(p.at("fusion.b6")));
  err.fuse = max_abs_diff(to_mat(tape.value(hg)), ref_g);

  Var y = predict_scores(tape, p, hg);
  err.predict = max_abs_diff(to_vec(tape.value(y)),
                             predict(to_mat(tape.value(hg)), to_mat(p.at("cls.w7")), to_vec(p.at("cls.b7"))));
  return err;
}

struct GradCheck {
  double max_relative_error = 0;
  std::string worst;
  std::size_t checked = 0;
};

/// Relative error |a - n| / max(|a|, |n|, floor) over every parameter
/// entry, with central differences of step `h` on the eval-mode loss.
inline GradCheck gradient_check(nn::Model<double>& model, const nn::DocumentInput& input,
                                const std::vector<int>& labels, double h, double floor) {
  nn::Gradients<double> grads;
  nn::document_loss(model, input, labels, nullptr, &grads);
  GradCheck out;
  for (auto& [name, tensor] : model.params.tensors()) {
    const auto it = grads.find(name);
    for (std::size_t i = 0; i < tensor.size(); ++i) {
      const double saved = tensor[i];
      tensor[i] = saved + h;
      const double up = nn::document_loss(model, input, labels, nullptr, nullptr);
      tensor[i] = saved - h;
      const double down = nn::document_loss(model, input, labels, nullptr, nullptr);
      tensor[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = it == grads.end() ? 0.0 : it->second[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      const double rel = std::abs(analytic - numeric) / denom;
      ++out.checked;
      if (rel > out.max_relative_error) {
        out.max_relative_error = rel;
        out.worst = name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return out;
}

/// The 4-EDU gradient-check fixture: two sentences, one coreference link
/// and a mixed-nuclearity tree.
inline Document gradient_document() {
  Document d;
  d.id = "grad";
  const std::vector<std::vector<std::string>> edus = {
      {"the", "river", "rose"}, {"because", "rain", "fell"}, {"it", "flooded", "towns", "."}, {"people", "left"}};
  for (std::size_t i = 0; i < edus.size(); ++i) {
    EduSpan e;
    e.start = d.tokens.size();
    d.tokens.insert(d.tokens.end(), edus[i].begin(), edus[i].end());
    e.end = d.tokens.size();
    e.sentence_index = i < 3 ? 0 : 1;
    e.has_subject = i == 3;
    d.edus.push_back(e);
  }
  d.sentences = {{0, d.edus[2].end}, {d.edus[3].start, d.tokens.size()}};
  d.rst_tree = "(N/N sequence (N/S cause (leaf 0) (S/N explanation (leaf 1) (leaf 2))) (leaf 3))";
  d.coref_clusters = {Cluster{{{1, 2}, {6, 7}}}};
  d.reference = {"the", "river", "flooded", "towns"};
  return d;
}

}  // namespace discosum::testing
