#pragma once

// Greedy EDU-level oracle labels. Each step adds the unselected EDU (with
// its dependency closure) that raises ROUGE-1 F1 the most; the search stops
// when no candidate gives a strictly positive gain. Ties go to the lowest
// EDU index.

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "discosum/document.hpp"
#include "discosum/metrics.hpp"
#include "discosum/rst.hpp"

namespace discosum {

struct OracleStep {
  std::size_t candidate = 0;
  std::vector<std::size_t> added;  // candidate plus newly forced ancestors
  double f1 = 0;
  double gain = 0;
};

struct OracleLabels {
  std::vector<int> labels;
  double achieved_r1 = 0;
  std::vector<OracleStep> steps;

  std::vector<std::size_t> positives() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i]) out.push_back(i);
    return out;
  }
};

/// ROUGE-1 F1 of the given EDU set rendered in document order.
inline double selection_r1(const Document& doc, const std::vector<char>& selected) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < selected.size(); ++i)
    if (selected[i]) order.push_back(i);
  const auto tokens = gather_edu_tokens(doc, order);
  return rouge_n(tokens, doc.reference, 1).f1;
}

inline OracleLabels make_oracle_labels(const Document& doc, const DependencyTree& dep) {
  if (doc.reference.empty())
    throw std::invalid_argument("make_oracle_labels: document '" + doc.id + "' has an empty reference");
  if (dep.size() != doc.edus.size())
    throw std::invalid_argument("make_oracle_labels: dependency tree size does not match EDU count");

  const std::size_t n = doc.edus.size();
  std::vector<char> selected(n, 0);
  double current = 0;
  OracleLabels result;

  while (true) {
    double best_gain = 0;
    double best_f1 = 0;
    std::vector<std::size_t> best_added;
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (selected[i]) continue;
      std::vector<char> trial = selected;
      std::vector<std::size_t> added;
      for (std::size_t c : dependency_closure({i}, dep)) {
        if (!trial[c]) {
          trial[c] = 1;
          added.push_back(c);
        }
      }
      const double f1 = selection_r1(doc, trial);
      const double gain = f1 - current;
      if (gain > best_gain) {
        best_gain = gain;
        best_f1 = f1;
        best = i;
        best_added = std::move(added);
      }
    }
    if (best == n) break;
    for (std::size_t c : best_added) selected[c] = 1;
    current = best_f1;
    result.steps.push_back({best, std::move(best_added), best_f1, best_gain});
  }

  result.labels.assign(selected.begin(), selected.end());
  result.achieved_r1 = current;
  return result;
}

}  // namespace discosum
