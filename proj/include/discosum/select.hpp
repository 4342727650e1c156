#pragma once

// Inference-time EDU selection under dependency closure and a length
// budget, summary rendering, and the Lead-3 baseline.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "discosum/document.hpp"
#include "discosum/rst.hpp"

namespace discosum {

struct SelectionBudget {
  std::optional<std::size_t> max_edus = 6;
  std::optional<std::size_t> max_tokens;
};

struct Selection {
  std::vector<std::size_t> edus;    // document order
  std::vector<std::size_t> forced;  // added only as closure ancestors
  std::vector<std::string> rendered;
};

struct RenderOptions {
  std::vector<std::string> connectives = {"and", "but", "or"};
};

namespace detail {

inline bool is_terminal(const std::string& t) { return t == "." || t == "!" || t == "?"; }

inline bool is_closing(const std::string& t) {
  return t == "''" || t == "\"" || t == "'" || t == ")" || t == "-rrb-";
}

inline bool ends_sentence(const std::vector<std::string>& tokens) {
  if (tokens.empty()) return false;
  if (is_terminal(tokens.back())) return true;
  return tokens.size() >= 2 && is_closing(tokens.back()) && is_terminal(tokens[tokens.size() - 2]);
}

inline std::string capitalize(std::string t) {
  if (!t.empty()) t[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
  return t;
}

}  // namespace detail

/// Selected EDUs (any order) rendered as text. Consecutive selected EDUs of
/// one source sentence form one output sentence; each output sentence drops
/// a leading connective, is capitalized, and gets a period if it lacks
/// terminal punctuation.
inline std::vector<std::string> render_edus(const Document& doc, std::vector<std::size_t> edus,
                                            const RenderOptions& options = {}) {
  std::sort(edus.begin(), edus.end());
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < edus.size()) {
    const std::size_t sent = doc.edus.at(edus[i]).sentence_index;
    std::vector<std::size_t> group;
    while (i < edus.size() && doc.edus.at(edus[i]).sentence_index == sent) group.push_back(edus[i++]);
    std::vector<std::string> tokens = gather_edu_tokens(doc, group);
    if (tokens.size() > 1 && std::find(options.connectives.begin(), options.connectives.end(),
                                       tokens.front()) != options.connectives.end())
      tokens.erase(tokens.begin());
    if (tokens.empty()) continue;
    tokens.front() = detail::capitalize(tokens.front());
    if (!detail::ends_sentence(tokens)) tokens.push_back(".");
    out.insert(out.end(), tokens.begin(), tokens.end());
  }
  return out;
}

inline std::vector<std::string> render_summary(const Document& doc, const Selection& sel,
                                               const RenderOptions& options = {}) {
  return render_edus(doc, sel.edus, options);
}

namespace detail {

template <typename FitsTokens>
Selection select_impl(std::span<const double> scores, const DependencyTree& dep,
                      const SelectionBudget& budget, FitsTokens fits_tokens) {
  if (scores.size() != dep.size())
    throw std::invalid_argument("select_summary: score count does not match EDU count");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<char> in(n, 0);
  std::size_t count = 0;
  Selection sel;
  for (std::size_t c : order) {
    if (budget.max_edus && count >= *budget.max_edus) break;
    if (in[c]) continue;
    std::vector<std::size_t> increment;
    for (std::size_t e : dependency_closure({c}, dep))
      if (!in[e]) increment.push_back(e);
    if (budget.max_edus && count + increment.size() > *budget.max_edus) continue;
    if (!fits_tokens(in, increment)) continue;
    for (std::size_t e : increment) {
      in[e] = 1;
      if (e != c) sel.forced.push_back(e);
    }
    count += increment.size();
  }
  for (std::size_t i = 0; i < n; ++i)
    if (in[i]) sel.edus.push_back(i);
  std::sort(sel.forced.begin(), sel.forced.end());
  return sel;
}

}  // namespace detail

/// Greedy selection by descending score (ties: lower index). A candidate is
/// accepted with its whole closure increment or skipped when that increment
/// would overflow the budget. EDU budgets only; use the Document overload
/// for token budgets.
inline Selection select_summary(std::span<const double> scores, const DependencyTree& dep,
                                const SelectionBudget& budget) {
  if (budget.max_tokens)
    throw std::invalid_argument("select_summary: token budgets need the document");
  return detail::select_impl(scores, dep, budget,
                             [](const std::vector<char>&, const std::vector<std::size_t>&) { return true; });
}

/// As above, also honoring `budget.max_tokens` against the rendered length,
/// and filling `rendered`.
inline Selection select_summary(const Document& doc, std::span<const double> scores,
                                const DependencyTree& dep, const SelectionBudget& budget,
                                const RenderOptions& options = {}) {
  auto fits = [&](const std::vector<char>& in, const std::vector<std::size_t>& increment) {
    if (!budget.max_tokens) return true;
    std::vector<std::size_t> trial = increment;
    for (std::size_t i = 0; i < in.size(); ++i)
      if (in[i]) trial.push_back(i);
    return render_edus(doc, std::move(trial), options).size() <= *budget.max_tokens;
  };
  Selection sel = detail::select_impl(scores, dep, budget, fits);
  sel.rendered = render_summary(doc, sel, options);
  return sel;
}

/// EDUs of the first three sentences.
inline Selection lead3(const Document& doc, const RenderOptions& options = {}) {
  Selection sel;
  for (std::size_t i = 0; i < doc.edus.size(); ++i)
    if (doc.edus[i].sentence_index < 3) sel.edus.push_back(i);
  sel.rendered = render_summary(doc, sel, options);
  return sel;
}

}  // namespace discosum
