#pragma once

// Minibatch training, prediction and corpus-level evaluation.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "discosum/document.hpp"
#include "discosum/metrics.hpp"
#include "discosum/nn/model.hpp"
#include "discosum/nn/optim.hpp"
#include "discosum/select.hpp"

namespace discosum {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Each index is
/// handled by exactly one thread, so per-index outputs need no locking.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += jobs) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::vector<std::string> lowercase(std::vector<std::string> tokens) {
  for (auto& t : tokens)
    for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return tokens;
}

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainOptions {
  std::size_t steps = 500;
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  std::size_t eval_every = 50;
  std::size_t jobs = 1;
  SelectionBudget budget;
};

struct TrainLogEntry {
  std::size_t step = 0;
  double loss = 0;
  std::optional<double> dev_r2;
};

template <std::floating_point T>
struct TrainResult {
  nn::Model<T> model;
  std::vector<TrainLogEntry> log;
  std::size_t best_step = 0;
  std::optional<double> best_dev_r2;
};

template <std::floating_point T>
Selection predict_document(const nn::Model<T>& model, const Document& doc, const nn::DocumentInput& input,
                           const SelectionBudget& budget) {
  const auto scores = nn::score_document(model, input);
  return select_summary(doc, scores, input.dependencies, budget);
}

template <std::floating_point T>
Selection predict_document(const nn::Model<T>& model, const Document& doc, const SelectionBudget& budget) {
  return predict_document(model, doc, model.prepare(doc), budget);
}

struct RougeReport {
  double r1 = 0;
  double r2 = 0;
  double rl = 0;
  std::size_t documents = 0;
};

/// Mean F1 of candidate token lists against references (both lowercased).
inline RougeReport evaluate_summaries(std::span<const std::vector<std::string>> candidates,
                                      std::span<const std::vector<std::string>> references) {
  if (candidates.size() != references.size())
    throw std::invalid_argument("evaluate_summaries: candidate and reference counts differ");
  RougeReport r;
  r.documents = candidates.size();
  if (candidates.empty()) return r;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto c = lowercase(candidates[i]);
    const auto ref = lowercase(references[i]);
    r.r1 += rouge_n(c, ref, 1).f1;
    r.r2 += rouge_n(c, ref, 2).f1;
    r.rl += rouge_l(c, ref).f1;
  }
  const double n = static_cast<double>(candidates.size());
  r.r1 /= n;
  r.r2 /= n;
  r.rl /= n;
  return r;
}

/// Fraction of EDUs whose thresholded score (>= 0.5) matches the label.
template <std::floating_point T>
double label_accuracy(const nn::Model<T>& model, std::span<const nn::DocumentInput> inputs,
                      std::span<const std::vector<int>> labels) {
  std::size_t hits = 0, total = 0;
  for (std::size_t d = 0; d < inputs.size(); ++d) {
    const auto scores = nn::score_document(model, inputs[d]);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      hits += (scores[i] >= 0.5 ? 1 : 0) == labels[d][i];
      ++total;
    }
  }
  return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

/// Trains `model` in place and returns the snapshot with the best dev ROUGE-2
/// (the final parameters when `dev` is empty). Batches are drawn from a
/// seeded per-epoch shuffle; dropout streams are derived from (seed, step,
/// batch position), so results do not depend on `jobs`.
template <std::floating_point T>
TrainResult<T> train(nn::Model<T> model, std::span<const Document> docs, std::span<const std::vector<int>> labels,
                     std::span<const Document> dev, const TrainOptions& opt) {
  if (docs.size() != labels.size()) throw std::invalid_argument("train: document and label counts differ");
  if (docs.empty()) throw std::invalid_argument("train: empty training corpus");

  std::vector<nn::DocumentInput> inputs(docs.size());
  parallel_for(docs.size(), opt.jobs, [&](std::size_t i) { inputs[i] = model.prepare(docs[i]); });
  std::vector<nn::DocumentInput> dev_inputs(dev.size());
  parallel_for(dev.size(), opt.jobs, [&](std::size_t i) { dev_inputs[i] = model.prepare(dev[i]); });

  auto dev_r2 = [&]() {
    std::vector<std::vector<std::string>> cands(dev.size()), refs(dev.size());
    parallel_for(dev.size(), opt.jobs, [&](std::size_t i) {
      cands[i] = predict_document(model, dev[i], dev_inputs[i], opt.budget).rendered;
      refs[i] = dev[i].reference;
    });
    return evaluate_summaries(cands, refs).r2;
  };

  nn::Rng order_rng = nn::Rng::derive(model.config.seed, 0x5eed);
  std::vector<std::size_t> order(docs.size());
  std::size_t cursor = order.size();

  nn::AdamState<T> adam;
  TrainResult<T> result{model, {}, 0, std::nullopt};
  const std::size_t batch = std::max<std::size_t>(1, std::min(opt.batch_size, docs.size()));

  for (std::size_t step = 1; step <= opt.steps; ++step) {
    std::vector<std::size_t> members;
    while (members.size() < batch) {
      if (cursor == order.size()) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        order_rng.shuffle(order);
        cursor = 0;
      }
      members.push_back(order[cursor++]);
    }

    std::vector<nn::Gradients<T>> grads(members.size());
    std::vector<T> losses(members.size());
    parallel_for(members.size(), opt.jobs, [&](std::size_t b) {
      nn::Rng drop = nn::Rng::derive(model.config.seed, step, b);
      const std::size_t d = members[b];
      losses[b] = nn::document_loss(model, inputs[d], labels[d], &drop, &grads[b]);
    });

    nn::Gradients<T> total = std::move(grads[0]);
    double loss = losses[0];
    for (std::size_t b = 1; b < members.size(); ++b) {
      for (auto& [name, g] : grads[b]) {
        auto it = total.find(name);
        if (it == total.end()) total.emplace(name, std::move(g));
        else it->second += g;
      }
      loss += losses[b];
    }
    const T scale = T(1) / static_cast<T>(members.size());
    for (auto& [_, g] : total)
      for (auto& v : g.data()) v *= scale;
    loss /= static_cast<double>(members.size());
    if (!std::isfinite(loss))
      throw TrainingDiverged("training diverged: non-finite loss at step " + std::to_string(step));

    nn::adam_step(model.params, total, adam, opt.learning_rate);

    TrainLogEntry entry{step, loss, std::nullopt};
    const bool eval_now = !dev.empty() && opt.eval_every > 0 && (step % opt.eval_every == 0 || step == opt.steps);
    if (eval_now) {
      entry.dev_r2 = dev_r2();
      if (!result.best_dev_r2 || *entry.dev_r2 > *result.best_dev_r2) {
        result.best_dev_r2 = entry.dev_r2;
        result.best_step = step;
        result.model = model;
      }
    }
    result.log.push_back(entry);
  }
  if (dev.empty()) {
    result.model = model;
    result.best_step = opt.steps;
  }
  return result;
}

}  // namespace discosum
