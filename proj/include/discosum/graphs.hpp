#pragma once

// EDU-level discourse graphs.
//
// RST graph: directed, entry(i, j) = 1 iff EDU j depends on head EDU i.
// Coreference graph: symmetric; EDUs hosting mentions of one cluster form a
// clique, and every node carries a self-loop.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "discosum/corpus.hpp"
#include "discosum/document.hpp"
#include "discosum/rst.hpp"

namespace discosum {

class AdjacencyMatrix {
 public:
  AdjacencyMatrix() = default;
  AdjacencyMatrix(std::size_t n, bool directed) : n_(n), directed_(directed), entries_(n * n, 0) {}

  std::size_t size() const { return n_; }
  bool directed() const { return directed_; }

  bool operator()(std::size_t i, std::size_t j) const { return entries_[i * n_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool value = true) { entries_[i * n_ + j] = value ? 1 : 0; }

  std::size_t trace() const {
    std::size_t t = 0;
    for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
  }

  bool is_symmetric() const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

  /// Number of nonzero entries, self-loops included.
  std::size_t nonzeros() const {
    std::size_t c = 0;
    for (auto e : entries_) c += e;
    return c;
  }

  /// Directed graphs: nonzero off-diagonal entries. Undirected graphs:
  /// unordered pairs i < j, self-loops excluded.
  std::size_t edge_count() const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < n_; ++j)
        if (i != j && (*this)(i, j) && (directed_ || i < j)) ++c;
    return c;
  }

  friend bool operator==(const AdjacencyMatrix&, const AdjacencyMatrix&) = default;

 private:
  std::size_t n_ = 0;
  bool directed_ = false;
  std::vector<std::uint8_t> entries_;
};

inline AdjacencyMatrix build_rst_graph(const DependencyTree& dep) {
  AdjacencyMatrix g(dep.size(), true);
  for (std::size_t j = 0; j < dep.size(); ++j)
    if (dep.head[j]) g.set(*dep.head[j], j);
  return g;
}

/// Adds one cluster's clique, mirroring the pairwise loop of the reference
/// construction (pairs include j == k).
inline void add_cluster_edges(AdjacencyMatrix& g, std::span<const std::size_t> locations) {
  for (std::size_t j : locations)
    for (std::size_t k : locations) g.set(j, k);
}

inline AdjacencyMatrix build_coref_graph(std::span<const Cluster> clusters,
                                         const std::vector<EduSpan>& edus) {
  AdjacencyMatrix g(edus.size(), false);
  for (const auto& c : clusters) {
    const auto locations = mention_edus(c, edus);
    add_cluster_edges(g, locations);
  }
  for (std::size_t i = 0; i < edus.size(); ++i) g.set(i, i);
  return g;
}

inline AdjacencyMatrix build_coref_graph(const Document& doc) {
  return build_coref_graph(doc.coref_clusters, doc.edus);
}

using NeighborLists = std::vector<std::vector<std::size_t>>;

/// Message-passing neighborhoods. Undirected graphs: N_i = {j : g(i, j)}.
/// Directed graphs: the symmetrized union of in- and out-neighbors without
/// self, or, with `directed_messages`, only the sources of incoming edges.
inline NeighborLists message_view(const AdjacencyMatrix& g, bool directed_messages = false) {
  const std::size_t n = g.size();
  NeighborLists out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!g.directed()) {
        if (g(i, j)) out[i].push_back(j);
      } else if (i != j) {
        if (directed_messages ? g(j, i) : (g(i, j) || g(j, i))) out[i].push_back(j);
      }
    }
  }
  return out;
}

/// Corpus averages in the shape of a dataset statistics table.
struct GraphStats {
  std::size_t documents = 0;
  double sentences = 0;
  double edus = 0;
  double tokens = 0;
  double rst_edges = 0;
  double coref_edges = 0;
};

inline GraphStats graph_stats(std::span<const Document> docs) {
  GraphStats s;
  s.documents = docs.size();
  if (docs.empty()) return s;
  for (const auto& d : docs) {
    s.sentences += static_cast<double>(d.sentences.size());
    s.edus += static_cast<double>(d.edus.size());
    s.tokens += static_cast<double>(d.tokens.size());
    s.rst_edges += static_cast<double>(build_rst_graph(document_dependencies(d)).edge_count());
    s.coref_edges += static_cast<double>(build_coref_graph(d).edge_count());
  }
  const double n = static_cast<double>(docs.size());
  s.sentences /= n;
  s.edus /= n;
  s.tokens /= n;
  s.rst_edges /= n;
  s.coref_edges /= n;
  return s;
}

}  // namespace discosum
