#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "discosum/document.hpp"

namespace discosum::testing {

inline std::vector<std::string> split(const std::string& text) {
  std::istringstream ss(text);
  std::vector<std::string> out;
  for (std::string w; ss >> w;) out.push_back(w);
  return out;
}

/// Single-sentence document segmented into five EDUs, shaped after the
/// classic worked example: EDU numbers 1..5 in prose are indices 0..4 here.
///   span [1-5] = S/N (1, [2-5])      head 2
///   span [2-5] = N/N (2, [3-5])      head 2
///   span [3-5] = N/S (3, [4-5])      head 3
///   span [4-5] = S/N (4, 5)          head 5
inline const char* kFigureTree =
    "(S/N background (leaf 0) (N/N elaboration (leaf 1) "
    "(N/S elaboration (leaf 2) (S/N elaboration (leaf 3) (leaf 4)))))";

inline Document figure_document() {
  const std::vector<std::vector<std::string>> edus = {
      split("as the outbreak spread ,"),
      split("this photo is from the prize - winning series ,"),
      split("and shows a suspected patient , aged 8 ,"),
      split("whose uncle was carrying him ,"),
      split("being carried to a clinic in liberia ."),
  };
  Document d;
  d.id = "figure";
  for (std::size_t i = 0; i < edus.size(); ++i) {
    EduSpan e;
    e.start = d.tokens.size();
    d.tokens.insert(d.tokens.end(), edus[i].begin(), edus[i].end());
    e.end = d.tokens.size();
    e.sentence_index = 0;
    d.edus.push_back(e);
  }
  d.sentences = {{0, d.tokens.size()}};
  d.rst_tree = kFigureTree;
  // "photo" (EDU 1); "patient" (EDU 2) / "him" (EDU 3)
  d.coref_clusters = {Cluster{{{6, 7}}}, Cluster{{{19, 20}, {28, 29}}}};
  d.reference = split("a suspected patient being carried to a clinic in liberia .");
  return d;
}

/// Builds a document from sentences of EDUs given as text; every EDU is its
/// own RST leaf joined right-branching by N/S nodes.
inline Document make_document(const std::string& id, const std::vector<std::vector<std::string>>& sentences,
                              const std::string& reference) {
  Document d;
  d.id = id;
  for (std::size_t s = 0; s < sentences.size(); ++s) {
    const std::size_t sent_start = d.tokens.size();
    for (const auto& edu_text : sentences[s]) {
      const auto toks = split(edu_text);
      EduSpan e;
      e.start = d.tokens.size();
      d.tokens.insert(d.tokens.end(), toks.begin(), toks.end());
      e.end = d.tokens.size();
      e.sentence_index = s;
      d.edus.push_back(e);
    }
    d.sentences.push_back({sent_start, d.tokens.size()});
  }
  std::string tree = "(leaf " + std::to_string(d.edus.size() - 1) + ")";
  for (std::size_t i = d.edus.size() - 1; i-- > 0;)
    tree = "(N/S elaboration (leaf " + std::to_string(i) + ") " + tree + ")";
  d.rst_tree = tree;
  d.reference = split(reference);
  return d;
}

}  // namespace discosum::testing
