#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace discosum {

/// Half-open token range [start, end).
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  bool contains(const TokenSpan& other) const {
    return start <= other.start && other.end <= end;
  }
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

/// One elementary discourse unit. `has_subject` feeds the N/N dependency
/// rule: an N/N right child whose head has a subject stays unattached.
struct EduSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t sentence_index = 0;
  bool has_subject = false;

  std::size_t length() const { return end - start; }
  TokenSpan span() const { return {start, end}; }
  friend bool operator==(const EduSpan&, const EduSpan&) = default;
};

struct Cluster {
  std::vector<TokenSpan> mentions;
  friend bool operator==(const Cluster&, const Cluster&) = default;
};

/// A pre-segmented, pre-parsed document. Tokens are stored lowercased.
struct Document {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<TokenSpan> sentences;
  std::vector<EduSpan> edus;
  std::string rst_tree;
  std::vector<Cluster> coref_clusters;
  std::vector<std::string> reference;

  std::size_t edu_count() const { return edus.size(); }

  /// Tokens of EDU `i` as a contiguous copy.
  std::vector<std::string> edu_tokens(std::size_t i) const {
    const auto& e = edus.at(i);
    return {tokens.begin() + static_cast<std::ptrdiff_t>(e.start),
            tokens.begin() + static_cast<std::ptrdiff_t>(e.end)};
  }

  friend bool operator==(const Document&, const Document&) = default;
};

/// Concatenated tokens of the given EDUs in the order given.
inline std::vector<std::string> gather_edu_tokens(const Document& doc,
                                                  const std::vector<std::size_t>& edus) {
  std::vector<std::string> out;
  for (std::size_t i : edus) {
    const auto& e = doc.edus.at(i);
    out.insert(out.end(), doc.tokens.begin() + static_cast<std::ptrdiff_t>(e.start),
               doc.tokens.begin() + static_cast<std::ptrdiff_t>(e.end));
  }
  return out;
}

}  // namespace discosum
