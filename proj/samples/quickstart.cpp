// Loads a corpus, then for each document prints the discourse dependency
// heads, the oracle labels and a closure-respecting 3-EDU summary.

#include <iostream>

#include "discosum/corpus.hpp"
#include "discosum/graphs.hpp"
#include "discosum/oracle.hpp"
#include "discosum/select.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: quickstart CORPUS.jsonl\n";
    return 2;
  }
  try {
    for (const auto& doc : discosum::load_corpus(argv[1])) {
      const auto dep = discosum::document_dependencies(doc);
      std::cout << doc.id << ": " << doc.edu_count() << " EDUs\n  heads:";
      for (const auto& h : dep.head) std::cout << ' ' << (h ? std::to_string(*h) : "-");

      const auto oracle = discosum::make_oracle_labels(doc, dep);
      std::cout << "\n  oracle:";
      for (int l : oracle.labels) std::cout << ' ' << l;
      std::cout << "  (R-1 " << oracle.achieved_r1 << ")\n";

      // Score EDUs by oracle label and position, then select under closure.
      std::vector<double> scores;
      for (std::size_t i = 0; i < doc.edu_count(); ++i)
        scores.push_back(oracle.labels[i] - 0.01 * static_cast<double>(i));
      const auto sel = discosum::select_summary(doc, scores, dep, {3, std::nullopt});
      std::cout << "  summary:";
      for (const auto& t : sel.rendered) std::cout << ' ' << t;
      std::cout << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "quickstart: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
