#pragma once

// RST constituency trees over EDUs: parsing from the bracketed text form,
// head derivation from nuclearity, conversion to EDU dependency trees, and
// dependency closure.
//
// Text form (whitespace-insensitive):
//   tree := "(leaf" INT ")" | "(" NUC "/" NUC REL tree tree+ ")"
//   NUC  := "N" | "S"
// Nodes with more than two children are binarized left-branching; synthetic
// inner nodes are N/N and carry the parent's relation.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "discosum/document.hpp"

namespace discosum {

enum class Nuclearity { Nucleus, Satellite };

inline char nuclearity_tag(Nuclearity n) { return n == Nuclearity::Nucleus ? 'N' : 'S'; }

class RstParseError : public std::runtime_error {
 public:
  RstParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

struct RstNode {
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::size_t edu = kNone;  // leaves only
  std::size_t left = kNone;
  std::size_t right = kNone;
  Nuclearity left_nuclearity = Nuclearity::Nucleus;
  Nuclearity right_nuclearity = Nuclearity::Nucleus;
  std::string relation;
  std::size_t first_edu = 0;  // covered EDUs, half-open
  std::size_t end_edu = 0;

  bool is_leaf() const { return left == kNone; }
};

/// Binary RST tree stored in post-order: every child precedes its parent and
/// the root is the last node.
class RstTree {
 public:
  RstTree() = default;

  static RstTree leaf_only() {
    RstTree t;
    t.add_leaf(0);
    return t;
  }

  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  std::size_t root() const { return nodes_.size() - 1; }
  const RstNode& node(std::size_t i) const { return nodes_.at(i); }
  const std::vector<RstNode>& nodes() const { return nodes_; }

  std::size_t leaf_count() const { return empty() ? 0 : nodes_.back().end_edu; }

  /// Node covering exactly EDUs [first, end), if any.
  std::optional<std::size_t> find_span(std::size_t first, std::size_t end) const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].first_edu == first && nodes_[i].end_edu == end) return i;
    }
    return std::nullopt;
  }

  std::size_t add_leaf(std::size_t edu) {
    RstNode n;
    n.edu = edu;
    n.first_edu = edu;
    n.end_edu = edu + 1;
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  std::size_t add_node(std::size_t left, std::size_t right, Nuclearity ln, Nuclearity rn,
                       std::string relation) {
    RstNode n;
    n.left = left;
    n.right = right;
    n.left_nuclearity = ln;
    n.right_nuclearity = rn;
    n.relation = std::move(relation);
    n.first_edu = nodes_.at(left).first_edu;
    n.end_edu = nodes_.at(right).end_edu;
    nodes_.push_back(std::move(n));
    return nodes_.size() - 1;
  }

  std::string to_string() const {
    std::string out;
    if (!empty()) write(root(), out);
    return out;
  }

  /// Tree restricted to the first `keep` leaves. Nodes left with a single
  /// child collapse into that child.
  RstTree prefix(std::size_t keep) const {
    if (keep == 0) throw std::invalid_argument("RstTree::prefix: keep must be >= 1");
    RstTree out;
    copy_prefix(root(), keep, out);
    return out;
  }

 private:
  void write(std::size_t i, std::string& out) const {
    const RstNode& n = nodes_[i];
    if (n.is_leaf()) {
      out += "(leaf " + std::to_string(n.edu) + ")";
      return;
    }
    out += '(';
    out += nuclearity_tag(n.left_nuclearity);
    out += '/';
    out += nuclearity_tag(n.right_nuclearity);
    out += ' ';
    out += n.relation;
    out += ' ';
    write(n.left, out);
    out += ' ';
    write(n.right, out);
    out += ')';
  }

  std::optional<std::size_t> copy_prefix(std::size_t i, std::size_t keep, RstTree& out) const {
    const RstNode& n = nodes_[i];
    if (n.first_edu >= keep) return std::nullopt;
    if (n.is_leaf()) return out.add_leaf(n.edu);
    auto l = copy_prefix(n.left, keep, out);
    auto r = copy_prefix(n.right, keep, out);
    if (l && r) return out.add_node(*l, *r, n.left_nuclearity, n.right_nuclearity, n.relation);
    return l ? l : r;
  }

  std::vector<RstNode> nodes_;
};

namespace detail {

class RstParser {
 public:
  explicit RstParser(std::string_view text) : text_(text) {}

  RstTree parse() {
    skip_ws();
    parse_tree();
    skip_ws();
    if (pos_ != text_.size()) fail("trailing input after tree");
    if (tree_.empty()) fail("empty tree");
    return std::move(tree_);
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw RstParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= text_.size()) fail(std::string("unbalanced parentheses: expected '") + c + "'");
    if (text_[pos_] != c) fail(std::string("expected '") + c + "', found '" + text_[pos_] + "'");
    ++pos_;
  }

  static bool is_delim(char c) {
    return std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')';
  }

  std::string_view word(bool stop_at_slash) {
    skip_ws();
    std::size_t begin = pos_;
    while (pos_ < text_.size() && !is_delim(text_[pos_]) && !(stop_at_slash && text_[pos_] == '/'))
      ++pos_;
    return text_.substr(begin, pos_ - begin);
  }

  Nuclearity nuclearity() {
    skip_ws();
    std::size_t begin = pos_;
    std::string_view w = word(true);
    if (w == "N") return Nuclearity::Nucleus;
    if (w == "S") return Nuclearity::Satellite;
    pos_ = begin;
    fail("unknown nuclearity tag '" + std::string(w) + "'");
  }

  std::size_t parse_tree() {
    expect('(');
    skip_ws();
    std::size_t head_pos = pos_;
    std::string_view first = word(true);
    if (first == "leaf") {
      std::size_t num_pos = (skip_ws(), pos_);
      std::string_view digits = word(false);
      if (digits.empty() ||
          !std::all_of(digits.begin(), digits.end(),
                       [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        pos_ = num_pos;
        fail("expected leaf index");
      }
      std::size_t idx = std::stoull(std::string(digits));
      if (idx != next_leaf_) {
        pos_ = num_pos;
        fail("leaf index gap: expected " + std::to_string(next_leaf_) + ", found " +
             std::to_string(idx));
      }
      ++next_leaf_;
      expect(')');
      return tree_.add_leaf(idx);
    }

    pos_ = head_pos;
    Nuclearity ln = nuclearity();
    expect('/');
    Nuclearity rn = nuclearity();
    if (ln == Nuclearity::Satellite && rn == Nuclearity::Satellite) {
      pos_ = head_pos;
      fail("node has no nucleus");
    }
    std::string relation(word(false));
    if (relation.empty()) fail("expected relation label");

    std::vector<std::size_t> children;
    skip_ws();
    while (pos_ < text_.size() && text_[pos_] == '(') {
      children.push_back(parse_tree());
      skip_ws();
    }
    if (children.size() < 2) fail("internal node needs at least two children");
    expect(')');

    std::size_t acc = children[0];
    for (std::size_t i = 1; i + 1 < children.size(); ++i)
      acc = tree_.add_node(acc, children[i], Nuclearity::Nucleus, Nuclearity::Nucleus, relation);
    return tree_.add_node(acc, children.back(), ln, rn, relation);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t next_leaf_ = 0;
  RstTree tree_;
};

}  // namespace detail

inline RstTree parse_rst_sexpr(std::string_view text) { return detail::RstParser(text).parse(); }

/// Head EDU of every tree node (indexed like `tree.nodes()`). A leaf heads
/// itself; N/S and S/N nodes take the nucleus head; N/N nodes take the left
/// head.
inline std::vector<std::size_t> derive_heads(const RstTree& tree) {
  std::vector<std::size_t> heads(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const RstNode& n = tree.node(i);
    if (n.is_leaf()) {
      heads[i] = n.edu;
    } else if (n.left_nuclearity == Nuclearity::Satellite) {
      heads[i] = heads[n.right];
    } else {
      heads[i] = heads[n.left];
    }
  }
  return heads;
}

/// EDU-level dependency structure. With every `has_subject` flag false it is
/// a single tree; otherwise it may be a forest.
struct DependencyTree {
  std::vector<std::optional<std::size_t>> head;
  std::vector<std::size_t> roots;  // ascending

  std::size_t size() const { return head.size(); }
  std::size_t root() const { return roots.at(0); }
  bool is_tree() const { return roots.size() == 1; }
  std::size_t edge_count() const { return head.size() - roots.size(); }

  static DependencyTree flat(std::size_t n) {
    DependencyTree dep;
    dep.head.assign(n, std::nullopt);
    for (std::size_t i = 0; i < n; ++i) dep.roots.push_back(i);
    return dep;
  }
};

inline DependencyTree to_dependency(const RstTree& tree, std::span<const EduSpan> edus) {
  if (tree.leaf_count() != edus.size())
    throw std::invalid_argument("to_dependency: tree has " + std::to_string(tree.leaf_count()) +
                                " leaves but " + std::to_string(edus.size()) + " EDUs given");
  const auto heads = derive_heads(tree);
  DependencyTree dep;
  dep.head.assign(edus.size(), std::nullopt);
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const RstNode& n = tree.node(i);
    if (n.is_leaf()) continue;
    const std::size_t hl = heads[n.left];
    const std::size_t hr = heads[n.right];
    const bool left_n = n.left_nuclearity == Nuclearity::Nucleus;
    const bool right_n = n.right_nuclearity == Nuclearity::Nucleus;
    if (left_n && !right_n) {
      dep.head[hr] = hl;
    } else if (!left_n && right_n) {
      dep.head[hl] = hr;
    } else if (!edus[hr].has_subject) {
      dep.head[hr] = hl;
    }
  }
  for (std::size_t i = 0; i < dep.head.size(); ++i)
    if (!dep.head[i]) dep.roots.push_back(i);
  return dep;
}

/// `selected` plus every head-chain ancestor, sorted ascending.
inline std::vector<std::size_t> dependency_closure(std::span<const std::size_t> selected,
                                                   const DependencyTree& dep) {
  std::vector<char> in(dep.size(), 0);
  for (std::size_t s : selected) {
    if (s >= dep.size())
      throw std::out_of_range("dependency_closure: EDU index " + std::to_string(s) +
                              " out of range");
    std::optional<std::size_t> cur = s;
    while (cur && !in[*cur]) {
      in[*cur] = 1;
      cur = dep.head[*cur];
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < in.size(); ++i)
    if (in[i]) out.push_back(i);
  return out;
}

inline std::vector<std::size_t> dependency_closure(std::initializer_list<std::size_t> selected,
                                                   const DependencyTree& dep) {
  return dependency_closure(std::span<const std::size_t>(selected.begin(), selected.size()), dep);
}

/// Parses the document's tree and converts it in one step.
inline DependencyTree document_dependencies(const Document& doc) {
  return to_dependency(parse_rst_sexpr(doc.rst_tree), doc.edus);
}

}  // namespace discosum
