#pragma once

// JSONL ingestion, validation and serialization of documents.
//
// One document per line:
//   {"id": str, "tokens": [str], "sentences": [[int,int]],
//    "edus": [{"start":int,"end":int,"sent":int,"has_subject":bool?}],
//    "rst_tree": str, "coref": [[[int,int]]], "reference": [str]}
// All spans are half-open.

#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "discosum/document.hpp"
#include "discosum/rst.hpp"

namespace discosum {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every violated document invariant, empty iff the document is valid.
inline std::vector<std::string> validate_document(const Document& doc) {
  std::vector<std::string> v;
  const std::size_t n_tok = doc.tokens.size();

  std::size_t expect_start = 0;
  for (std::size_t s = 0; s < doc.sentences.size(); ++s) {
    const auto& sent = doc.sentences[s];
    if (sent.start >= sent.end) v.push_back("sentence " + std::to_string(s) + " is empty");
    if (sent.start != expect_start)
      v.push_back("sentences not contiguous at index " + std::to_string(s));
    if (sent.end > n_tok) v.push_back("sentence " + std::to_string(s) + " exceeds token count");
    expect_start = sent.end;
  }
  if (!doc.sentences.empty() && expect_start != n_tok)
    v.push_back("sentences do not cover all tokens");

  if (doc.edus.empty()) v.push_back("document has no EDUs");
  for (std::size_t k = 0; k < doc.edus.size(); ++k) {
    const auto& e = doc.edus[k];
    const std::string at = " at index " + std::to_string(k);
    if (e.start >= e.end) v.push_back("empty edu" + at);
    if (e.end > n_tok) v.push_back("edu exceeds token count" + at);
    if (k == 0 && e.start != 0) v.push_back("edus do not start at token 0");
    if (k > 0) {
      const auto& prev = doc.edus[k - 1];
      if (e.start < prev.end) {
        v.push_back("edus overlap" + at);
      } else if (e.start > prev.end) {
        v.push_back("edus leave a gap" + at);
      }
    }
    if (e.sentence_index >= doc.sentences.size()) {
      v.push_back("edu sentence index out of range" + at);
    } else if (!doc.sentences[e.sentence_index].contains(e.span())) {
      v.push_back("edu not inside its sentence" + at);
    }
  }
  if (!doc.edus.empty() && doc.edus.back().end != n_tok) v.push_back("edus do not cover all tokens");

  try {
    const RstTree tree = parse_rst_sexpr(doc.rst_tree);
    if (tree.leaf_count() != doc.edus.size())
      v.push_back("leaf/EDU count mismatch: tree has " + std::to_string(tree.leaf_count()) +
                  " leaves, document has " + std::to_string(doc.edus.size()) + " EDUs");
  } catch (const RstParseError& e) {
    v.push_back(std::string("rst_tree: ") + e.what());
  }

  for (std::size_t c = 0; c < doc.coref_clusters.size(); ++c) {
    const auto& cl = doc.coref_clusters[c];
    const std::string name = "cluster " + std::to_string(c);
    if (cl.mentions.empty()) v.push_back(name + " has no mentions");
    for (std::size_t m = 0; m < cl.mentions.size(); ++m) {
      const auto& men = cl.mentions[m];
      bool inside = false;
      for (const auto& e : doc.edus) inside = inside || e.span().contains(men);
      if (men.start >= men.end || !inside)
        v.push_back(name + " mention " + std::to_string(m) + " is not inside a single EDU");
    }
  }
  return v;
}

/// EDU index hosting each mention of `cluster`. Mentions outside every EDU
/// are skipped.
inline std::vector<std::size_t> mention_edus(const Cluster& cluster, const std::vector<EduSpan>& edus) {
  std::vector<std::size_t> out;
  for (const auto& m : cluster.mentions) {
    for (std::size_t i = 0; i < edus.size(); ++i) {
      if (edus[i].span().contains(m)) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end()) throw CorpusError(std::string("missing field '") + field + "'");
  return *it;
}

inline TokenSpan parse_span(const nlohmann::json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() || !j[1].is_number_unsigned())
    throw CorpusError("field '" + field + "' must hold [start, end] pairs of non-negative integers");
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

inline std::vector<std::string> parse_strings(const nlohmann::json& j, const char* field) {
  if (!j.is_array()) throw CorpusError(std::string("field '") + field + "' must be an array");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& t : j) {
    if (!t.is_string()) throw CorpusError(std::string("field '") + field + "' must hold strings");
    out.push_back(t.get<std::string>());
  }
  return out;
}

inline std::size_t get_index(const nlohmann::json& obj, const char* field) {
  const auto& v = require(obj, field);
  if (!v.is_number_unsigned())
    throw CorpusError(std::string("field 'edus.") + field + "' must be a non-negative integer");
  return v.get<std::size_t>();
}

}  // namespace detail

/// Builds a Document from one parsed JSON object. Throws CorpusError naming
/// the offending field; does not check cross-field invariants.
inline Document document_from_json(const nlohmann::json& j) {
  using detail::require;
  if (!j.is_object()) throw CorpusError("document must be a JSON object");
  Document doc;
  const auto& id = require(j, "id");
  if (!id.is_string()) throw CorpusError("field 'id' must be a string");
  doc.id = id.get<std::string>();
  doc.tokens = detail::parse_strings(require(j, "tokens"), "tokens");

  const auto& sents = require(j, "sentences");
  if (!sents.is_array()) throw CorpusError("field 'sentences' must be an array");
  for (const auto& s : sents) doc.sentences.push_back(detail::parse_span(s, "sentences"));

  const auto& edus = require(j, "edus");
  if (!edus.is_array()) throw CorpusError("field 'edus' must be an array");
  for (const auto& e : edus) {
    if (!e.is_object()) throw CorpusError("field 'edus' must hold objects");
    EduSpan span;
    span.start = detail::get_index(e, "start");
    span.end = detail::get_index(e, "end");
    span.sentence_index = detail::get_index(e, "sent");
    if (auto it = e.find("has_subject"); it != e.end()) {
      if (!it->is_boolean()) throw CorpusError("field 'edus.has_subject' must be a boolean");
      span.has_subject = it->get<bool>();
    }
    doc.edus.push_back(span);
  }

  const auto& tree = require(j, "rst_tree");
  if (!tree.is_string()) throw CorpusError("field 'rst_tree' must be a string");
  doc.rst_tree = tree.get<std::string>();

  const auto& coref = require(j, "coref");
  if (!coref.is_array()) throw CorpusError("field 'coref' must be an array");
  for (const auto& c : coref) {
    if (!c.is_array()) throw CorpusError("field 'coref' must hold arrays of mentions");
    Cluster cl;
    for (const auto& m : c) cl.mentions.push_back(detail::parse_span(m, "coref"));
    doc.coref_clusters.push_back(std::move(cl));
  }

  doc.reference = detail::parse_strings(require(j, "reference"), "reference");
  return doc;
}

inline nlohmann::json document_to_json(const Document& doc) {
  nlohmann::json j;
  j["id"] = doc.id;
  j["tokens"] = doc.tokens;
  j["sentences"] = nlohmann::json::array();
  for (const auto& s : doc.sentences) j["sentences"].push_back({s.start, s.end});
  j["edus"] = nlohmann::json::array();
  for (const auto& e : doc.edus) {
    j["edus"].push_back(
        {{"start", e.start}, {"end", e.end}, {"sent", e.sentence_index}, {"has_subject", e.has_subject}});
  }
  j["rst_tree"] = doc.rst_tree;
  j["coref"] = nlohmann::json::array();
  for (const auto& c : doc.coref_clusters) {
    nlohmann::json mentions = nlohmann::json::array();
    for (const auto& m : c.mentions) mentions.push_back({m.start, m.end});
    j["coref"].push_back(std::move(mentions));
  }
  j["reference"] = doc.reference;
  return j;
}

/// Reads one document per non-blank line. Errors name the 1-based line.
inline std::vector<Document> read_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw CorpusError(where + "malformed JSON (" + e.what() + ")");
    }
    Document doc;
    try {
      doc = document_from_json(j);
    } catch (const CorpusError& e) {
      throw CorpusError(where + e.what());
    }
    if (auto violations = validate_document(doc); !violations.empty())
      throw CorpusError(where + violations.front());
    docs.push_back(std::move(doc));
  }
  return docs;
}

inline std::vector<Document> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus file '" + path + "'");
  return read_corpus(in);
}

inline void write_corpus(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) out << document_to_json(d).dump() << '\n';
}

inline void save_corpus(const std::string& path, const std::vector<Document>& docs) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write corpus file '" + path + "'");
  write_corpus(out, docs);
}

/// Drops trailing EDUs (whole) until at most `max_tokens` tokens remain;
/// at least one EDU is always kept. Sentences, clusters and the RST tree are
/// trimmed to match.
inline Document truncate_document(const Document& doc, std::size_t max_tokens) {
  if (doc.tokens.size() <= max_tokens || doc.edus.size() <= 1) return doc;
  std::size_t keep = 1;
  while (keep < doc.edus.size() && doc.edus[keep].end <= max_tokens) ++keep;
  const std::size_t n_tok = doc.edus[keep - 1].end;

  Document out;
  out.id = doc.id;
  out.tokens.assign(doc.tokens.begin(), doc.tokens.begin() + static_cast<std::ptrdiff_t>(n_tok));
  out.edus.assign(doc.edus.begin(), doc.edus.begin() + static_cast<std::ptrdiff_t>(keep));
  for (const auto& s : doc.sentences) {
    if (s.start >= n_tok) break;
    out.sentences.push_back({s.start, std::min(s.end, n_tok)});
  }
  out.rst_tree = parse_rst_sexpr(doc.rst_tree).prefix(keep).to_string();
  for (const auto& c : doc.coref_clusters) {
    Cluster kept;
    for (const auto& m : c.mentions)
      if (m.end <= n_tok) kept.mentions.push_back(m);
    if (!kept.mentions.empty()) out.coref_clusters.push_back(std::move(kept));
  }
  out.reference = doc.reference;
  return out;
}

}  // namespace discosum
