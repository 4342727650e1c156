#pragma once

// Seeded generators for property tests and the synthetic learning corpora.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "discosum/document.hpp"
#include "discosum/nn/random.hpp"

namespace discosum::testing {

using nn::Rng;

/// Random binary RST tree over leaves [first, end) in text form.
inline std::string random_tree(Rng& rng, std::size_t first, std::size_t end) {
  if (end - first == 1) return "(leaf " + std::to_string(first) + ")";
  const std::size_t split = first + 1 + rng.below(end - first - 1);
  static const char* kNuc[] = {"N/S", "S/N", "N/N"};
  return std::string("(") + kNuc[rng.below(3)] + " rel " + random_tree(rng, first, split) + " " +
         random_tree(rng, split, end) + ")";
}

struct RandomDocOptions {
  std::size_t min_edus = 1;
  std::size_t max_edus = 30;
  std::size_t vocab = 12;
  double subject_probability = 0.0;
  std::size_t max_clusters = 4;
  std::size_t reference_length = 8;
};

inline std::string word(std::size_t i) { return "w" + std::to_string(i); }

inline Document random_document(Rng& rng, const RandomDocOptions& opt, const std::string& id = "rand") {
  Document d;
  d.id = id;
  const std::size_t n = opt.min_edus + rng.below(opt.max_edus - opt.min_edus + 1);
  std::size_t sent = 0;
  std::size_t sent_start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    EduSpan e;
    e.start = d.tokens.size();
    const std::size_t len = 1 + rng.below(4);
    for (std::size_t k = 0; k < len; ++k) d.tokens.push_back(word(rng.below(opt.vocab)));
    e.end = d.tokens.size();
    e.sentence_index = sent;
    e.has_subject = rng.uniform() < opt.subject_probability;
    d.edus.push_back(e);
    if (i + 1 == n || rng.uniform() < 0.4) {
      d.sentences.push_back({sent_start, d.tokens.size()});
      sent_start = d.tokens.size();
      ++sent;
    }
  }
  d.rst_tree = random_tree(rng, 0, n);
  const std::size_t clusters = rng.below(opt.max_clusters + 1);
  for (std::size_t c = 0; c < clusters; ++c) {
    Cluster cl;
    const std::size_t mentions = 1 + rng.below(4);
    for (std::size_t m = 0; m < mentions; ++m) {
      const EduSpan& e = d.edus[rng.below(n)];
      const std::size_t at = e.start + rng.below(e.length());
      cl.mentions.push_back({at, at + 1});
    }
    d.coref_clusters.push_back(std::move(cl));
  }
  for (std::size_t k = 0; k < opt.reference_length; ++k) d.reference.push_back(word(rng.below(opt.vocab)));
  return d;
}

/// Document whose EDUs each form one sentence and one independent root:
/// a flat multinuclear tree with every EDU flagged as having a subject.
inline Document flat_document(const std::string& id, const std::vector<std::vector<std::string>>& edus) {
  Document d;
  d.id = id;
  for (std::size_t i = 0; i < edus.size(); ++i) {
    EduSpan e;
    e.start = d.tokens.size();
    d.tokens.insert(d.tokens.end(), edus[i].begin(), edus[i].end());
    e.end = d.tokens.size();
    e.sentence_index = i;
    e.has_subject = true;
    d.edus.push_back(e);
    d.sentences.push_back({e.start, e.end});
  }
  if (edus.size() == 1) {
    d.rst_tree = "(leaf 0)";
  } else {
    d.rst_tree = "(N/N joint";
    for (std::size_t i = 0; i < edus.size(); ++i) d.rst_tree += " (leaf " + std::to_string(i) + ")";
    d.rst_tree += ")";
  }
  return d;
}

inline constexpr const char* kMarker = "zz";

/// Marker corpus: 6-10 EDUs per document, exactly two of which contain the
/// marker token. Marker EDUs head their sentence; a sentence may add one
/// satellite EDU. The reference is the marker EDUs' tokens in order.
inline Document marker_document(Rng& rng, const std::string& id) {
  const std::size_t n = 6 + rng.below(5);
  std::vector<char> marker(n, 0);
  std::size_t placed = 0;
  while (placed < 2) {
    const std::size_t i = rng.below(n);
    if (!marker[i]) {
      marker[i] = 1;
      ++placed;
    }
  }

  Document d;
  d.id = id;
  std::vector<std::string> groups;
  std::size_t i = 0;
  while (i < n) {
    const bool with_satellite = i + 1 < n && !marker[i + 1] && rng.uniform() < 0.5;
    const std::size_t members = with_satellite ? 2 : 1;
    const std::size_t sent = d.sentences.size();
    const std::size_t sent_start = d.tokens.size();
    for (std::size_t k = 0; k < members; ++k) {
      EduSpan e;
      e.start = d.tokens.size();
      const std::size_t len = 3 + rng.below(3);
      const std::size_t marker_at = marker[i + k] ? rng.below(len) : len;
      for (std::size_t t = 0; t < len; ++t)
        d.tokens.push_back(t == marker_at ? std::string(kMarker) : word(rng.below(60)));
      if (k + 1 == members) d.tokens.push_back(".");
      e.end = d.tokens.size();
      e.sentence_index = sent;
      e.has_subject = k == 0;
      d.edus.push_back(e);
    }
    d.sentences.push_back({sent_start, d.tokens.size()});
    groups.push_back(with_satellite ? "(N/S elaboration (leaf " + std::to_string(i) + ") (leaf " +
                                          std::to_string(i + 1) + "))"
                                    : "(leaf " + std::to_string(i) + ")");
    i += members;
  }
  if (groups.size() == 1) {
    d.rst_tree = groups[0];
  } else {
    d.rst_tree = "(N/N joint";
    for (const auto& g : groups) d.rst_tree += " " + g;
    d.rst_tree += ")";
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!marker[k]) continue;
    const auto& e = d.edus[k];
    d.reference.insert(d.reference.end(), d.tokens.begin() + static_cast<std::ptrdiff_t>(e.start),
                       d.tokens.begin() + static_cast<std::ptrdiff_t>(e.end));
  }
  return d;
}

inline std::vector<Document> marker_corpus(std::size_t count, std::uint64_t seed, const std::string& prefix) {
  Rng rng(seed);
  std::vector<Document> docs;
  for (std::size_t i = 0; i < count; ++i) docs.push_back(marker_document(rng, prefix + std::to_string(i)));
  return docs;
}

inline constexpr const char* kSeedToken = "seed";

struct LabeledDocument {
  Document doc;
  std::vector<int> labels;
};

/// Coreference corpus: 8-12 single-EDU sentences. One EDU carries the seed
/// token; positives are the seed EDU and every EDU sharing a coreference
/// cluster with it. Distractor clusters link other EDUs among themselves.
/// Apart from the seed token, positives and negatives are lexically alike.
inline LabeledDocument coref_document(Rng& rng, const std::string& id) {
  const std::size_t n = 8 + rng.below(5);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);

  const std::size_t seed_edu = perm[0];
  const std::size_t linked = 1 + rng.below(2);
  std::vector<std::size_t> seed_cluster(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(1 + linked));
  std::vector<std::vector<std::size_t>> distractors;
  std::size_t next = 1 + linked;
  const std::size_t n_distract = 1 + rng.below(2);
  for (std::size_t c = 0; c < n_distract && next + 2 <= n; ++c) {
    const std::size_t size = std::min<std::size_t>(2 + rng.below(2), n - next);
    distractors.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(next),
                             perm.begin() + static_cast<std::ptrdiff_t>(next + size));
    next += size;
  }

  std::vector<std::vector<std::string>> edus(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = 3 + rng.below(3);
    for (std::size_t t = 0; t < len; ++t) edus[i].push_back(word(rng.below(60)));
  }
  edus[seed_edu][rng.below(edus[seed_edu].size())] = kSeedToken;

  LabeledDocument out;
  out.doc = flat_document(id, edus);
  auto mention_in = [&](std::size_t edu) {
    const EduSpan& e = out.doc.edus[edu];
    const std::size_t at = e.start + rng.below(e.length());
    return TokenSpan{at, at + 1};
  };
  auto add_cluster = [&](const std::vector<std::size_t>& members) {
    Cluster cl;
    for (std::size_t m : members) cl.mentions.push_back(mention_in(m));
    out.doc.coref_clusters.push_back(std::move(cl));
  };
  add_cluster(seed_cluster);
  for (const auto& c : distractors) add_cluster(c);

  out.labels.assign(n, 0);
  for (std::size_t m : seed_cluster) out.labels[m] = 1;
  for (std::size_t i = 0; i < n; ++i)
    if (out.labels[i]) out.doc.reference.insert(out.doc.reference.end(), edus[i].begin(), edus[i].end());
  return out;
}

inline std::vector<LabeledDocument> coref_corpus(std::size_t count, std::uint64_t seed, const std::string& prefix) {
  Rng rng(seed);
  std::vector<LabeledDocument> docs;
  for (std::size_t i = 0; i < count; ++i) docs.push_back(coref_document(rng, prefix + std::to_string(i)));
  return docs;
}

}  // namespace discosum::testing
