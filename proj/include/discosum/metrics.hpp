#pragma once

// ROUGE-N (clipped n-gram overlap) and ROUGE-L (LCS over the flat token
// sequence). No stemming or stopword removal.

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace discosum {

struct RougeScore {
  double precision = 0;
  double recall = 0;
  double f1 = 0;

  static RougeScore from_counts(std::size_t hits, std::size_t candidate_total,
                                std::size_t reference_total) {
    RougeScore s;
    if (candidate_total == 0 || reference_total == 0) return s;
    s.precision = static_cast<double>(hits) / static_cast<double>(candidate_total);
    s.recall = static_cast<double>(hits) / static_cast<double>(reference_total);
    if (s.precision + s.recall > 0) s.f1 = 2 * s.precision * s.recall / (s.precision + s.recall);
    return s;
  }
};

using Tokens = std::span<const std::string>;

namespace detail {

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(Tokens tokens, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i)
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

inline std::size_t ngram_total(Tokens tokens, std::size_t n) {
  return tokens.size() >= n ? tokens.size() - n + 1 : 0;
}

}  // namespace detail

/// Clipped n-gram matches: each n-gram is credited min(count in a, count in b).
inline std::size_t ngram_overlap(Tokens a, Tokens b, std::size_t n) {
  const auto ca = detail::ngram_counts(a, n);
  const auto cb = detail::ngram_counts(b, n);
  std::size_t hits = 0;
  for (const auto& [gram, count] : ca) {
    if (auto it = cb.find(gram); it != cb.end()) hits += std::min(count, it->second);
  }
  return hits;
}

inline RougeScore rouge_n(Tokens candidate, Tokens reference, std::size_t n) {
  return RougeScore::from_counts(ngram_overlap(candidate, reference, n),
                                 detail::ngram_total(candidate, n),
                                 detail::ngram_total(reference, n));
}

inline std::size_t lcs_length(Tokens a, Tokens b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline RougeScore rouge_l(Tokens candidate, Tokens reference) {
  return RougeScore::from_counts(lcs_length(candidate, reference), candidate.size(),
                                 reference.size());
}

}  // namespace discosum
