#pragma once

// Minimal reverse-mode automatic differentiation over dense 2-D tensors.
//
// A Tape records every operation of one forward pass. Parameters are bound
// by name and read in place; after backward() their gradients are collected
// with accumulate_param_grads(). Each op's backward pass adds into the
// gradients of inputs that require them.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "discosum/document.hpp"
#include "discosum/nn/random.hpp"
#include "discosum/nn/tensor.hpp"

namespace discosum::nn {

struct Var {
  std::size_t id = 0;
};

template <std::floating_point T>
using Gradients = std::map<std::string, Tensor<T>>;

template <std::floating_point T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t)>;

  Var constant(Tensor<T> value) { return push(std::move(value), false, nullptr); }

  /// Binds a named parameter without copying it. `param` must outlive the tape.
  Var param(const std::string& name, const Tensor<T>& param, bool trainable = true) {
    Node n;
    n.external = &param;
    n.requires_grad = trainable;
    n.name = name;
    nodes_.push_back(std::move(n));
    return {nodes_.size() - 1};
  }

  Var push(Tensor<T> value, bool requires_grad, Backward backward) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return {nodes_.size() - 1};
  }

  const Tensor<T>& value(Var v) const {
    const Node& n = nodes_.at(v.id);
    return n.external ? *n.external : n.value;
  }

  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  /// Gradient buffer of `v`, allocated as zeros on first use.
  Tensor<T>& grad(Var v) {
    Node& n = nodes_.at(v.id);
    if (n.grad.shape() != value(v).shape()) n.grad = Tensor<T>(value(v).shape());
    return n.grad;
  }

  bool has_grad(Var v) const { return !nodes_.at(v.id).grad.empty(); }

  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(output)/d(output) = 1 for a single-element output and
  /// propagates to every node recorded before it.
  void backward(Var output) {
    if (value(output).size() != 1) throw std::invalid_argument("Tape::backward: output must be scalar");
    grad(output)[0] = T(1);
    for (std::size_t i = output.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.backward && n.requires_grad && !n.grad.empty()) n.backward(*this, i);
    }
  }

  /// Adds every bound parameter's gradient into `out`, keyed by name.
  void accumulate_param_grads(Gradients<T>& out) const {
    for (const Node& n : nodes_) {
      if (n.name.empty() || !n.requires_grad || n.grad.empty()) continue;
      auto it = out.find(n.name);
      if (it == out.end()) {
        out.emplace(n.name, n.grad);
      } else {
        it->second += n.grad;
      }
    }
  }

 private:
  struct Node {
    Tensor<T> value;
    const Tensor<T>* external = nullptr;
    Tensor<T> grad;
    bool requires_grad = false;
    Backward backward;
    std::string name;
  };

  std::vector<Node> nodes_;
};

namespace ops {

template <typename T>
bool any_grad(const Tape<T>& t, std::initializer_list<Var> vars) {
  for (Var v : vars)
    if (t.requires_grad(v)) return true;
  return false;
}

/// Rows of `table` selected by `ids`.
template <typename T>
Var gather_rows(Tape<T>& t, Var table, std::vector<std::size_t> ids) {
  const Tensor<T>& tab = t.value(table);
  const std::size_t d = tab.cols();
  Tensor<T> out = Tensor<T>::matrix(ids.size(), d);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= tab.rows()) throw std::out_of_range("gather_rows: id out of range");
    std::copy_n(tab.row(ids[r]).begin(), d, out.row(r).begin());
  }
  return t.push(std::move(out), t.requires_grad(table),
                [table, ids = std::move(ids)](Tape<T>& tp, std::size_t self) {
                  const Tensor<T>& g = tp.grad(Var{self});
                  Tensor<T>& gt = tp.grad(table);
                  for (std::size_t r = 0; r < ids.size(); ++r) {
                    auto src = g.row(r);
                    auto dst = gt.row(ids[r]);
                    for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                  }
                });
}

/// x W^T + b for x: m x k, W: n x k, b: n.
template <typename T>
Var linear(Tape<T>& t, Var x, Var w, Var b) {
  const Tensor<T>& X = t.value(x);
  const Tensor<T>& W = t.value(w);
  const Tensor<T>& B = t.value(b);
  const std::size_t m = X.rows(), k = X.cols(), n = W.rows();
  if (W.cols() != k || B.size() != n)
    throw std::invalid_argument("linear: shape mismatch x" + shape_string(X.shape()) + " W" +
                                shape_string(W.shape()) + " b" + shape_string(B.shape()));
  Tensor<T> out = Tensor<T>::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const T* xi = &X(i, 0);
    for (std::size_t o = 0; o < n; ++o) {
      const T* wo = &W(o, 0);
      T acc = B[o];
      for (std::size_t c = 0; c < k; ++c) acc += wo[c] * xi[c];
      out(i, o) = acc;
    }
  }
  return t.push(std::move(out), any_grad(t, {x, w, b}), [x, w, b, m, k, n](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& G = tp.grad(Var{self});
    const Tensor<T>& X = tp.value(x);
    const Tensor<T>& W = tp.value(w);
    if (tp.requires_grad(x)) {
      Tensor<T>& gx = tp.grad(x);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t o = 0; o < n; ++o) {
          const T g = G(i, o);
          if (g == T(0)) continue;
          for (std::size_t c = 0; c < k; ++c) gx(i, c) += g * W(o, c);
        }
    }
    if (tp.requires_grad(w)) {
      Tensor<T>& gw = tp.grad(w);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t o = 0; o < n; ++o) {
          const T g = G(i, o);
          if (g == T(0)) continue;
          for (std::size_t c = 0; c < k; ++c) gw(o, c) += g * X(i, c);
        }
    }
    if (tp.requires_grad(b)) {
      Tensor<T>& gb = tp.grad(b);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t o = 0; o < n; ++o) gb[o] += G(i, o);
    }
  });
}

template <typename T>
Var relu(Tape<T>& t, Var x) {
  Tensor<T> out = t.value(x);
  for (auto& v : out.data()) v = v > T(0) ? v : T(0);
  return t.push(std::move(out), t.requires_grad(x), [x](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.grad(Var{self});
    const Tensor<T>& X = tp.value(x);
    Tensor<T>& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (X[i] > T(0)) gx[i] += g[i];
  });
}

template <typename T>
Var add(Tape<T>& t, Var a, Var b) {
  Tensor<T> out = t.value(a);
  out += t.value(b);
  return t.push(std::move(out), any_grad(t, {a, b}), [a, b](Tape<T>& tp, std::size_t self) {
    const Tensor<T> g = tp.grad(Var{self});
    if (tp.requires_grad(a)) tp.grad(a) += g;
    if (tp.requires_grad(b)) tp.grad(b) += g;
  });
}

/// Inverted dropout with keep-probability 1 - p. Identity when `rng` is null
/// or p == 0.
template <typename T>
Var dropout(Tape<T>& t, Var x, double p, Rng* rng) {
  if (rng == nullptr || p <= 0) return x;
  const Tensor<T>& X = t.value(x);
  const T scale = T(1) / static_cast<T>(1 - p);
  std::vector<T> mask(X.size());
  for (auto& m : mask) m = rng->uniform() < p ? T(0) : scale;
  Tensor<T> out = X;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= mask[i];
  return t.push(std::move(out), t.requires_grad(x), [x, mask = std::move(mask)](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.grad(Var{self});
    Tensor<T>& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
  });
}

/// Row-wise layer normalization with per-column gain and bias.
template <typename T>
Var layer_norm(Tape<T>& t, Var x, Var gain, Var bias, double eps) {
  const Tensor<T>& X = t.value(x);
  const Tensor<T>& G = t.value(gain);
  const Tensor<T>& B = t.value(bias);
  const std::size_t m = X.rows(), d = X.cols();
  if (G.size() != d || B.size() != d) throw std::invalid_argument("layer_norm: affine size mismatch");
  Tensor<T> xhat = Tensor<T>::matrix(m, d);
  std::vector<T> inv_std(m);
  Tensor<T> out = Tensor<T>::matrix(m, d);
  for (std::size_t i = 0; i < m; ++i) {
    T mean = 0;
    for (std::size_t c = 0; c < d; ++c) mean += X(i, c);
    mean /= static_cast<T>(d);
    T var = 0;
    for (std::size_t c = 0; c < d; ++c) var += (X(i, c) - mean) * (X(i, c) - mean);
    var /= static_cast<T>(d);
    inv_std[i] = T(1) / std::sqrt(var + static_cast<T>(eps));
    for (std::size_t c = 0; c < d; ++c) {
      xhat(i, c) = (X(i, c) - mean) * inv_std[i];
      out(i, c) = xhat(i, c) * G[c] + B[c];
    }
  }
  return t.push(std::move(out), any_grad(t, {x, gain, bias}),
                [x, gain, bias, m, d, xhat = std::move(xhat), inv_std = std::move(inv_std)](
                    Tape<T>& tp, std::size_t self) {
                  const Tensor<T>& g = tp.grad(Var{self});
                  const Tensor<T>& G = tp.value(gain);
                  if (tp.requires_grad(gain)) {
                    Tensor<T>& gg = tp.grad(gain);
                    for (std::size_t i = 0; i < m; ++i)
                      for (std::size_t c = 0; c < d; ++c) gg[c] += g(i, c) * xhat(i, c);
                  }
                  if (tp.requires_grad(bias)) {
                    Tensor<T>& gb = tp.grad(bias);
                    for (std::size_t i = 0; i < m; ++i)
                      for (std::size_t c = 0; c < d; ++c) gb[c] += g(i, c);
                  }
                  if (tp.requires_grad(x)) {
                    Tensor<T>& gx = tp.grad(x);
                    std::vector<T> dxhat(d);
                    for (std::size_t i = 0; i < m; ++i) {
                      T mean_d = 0, mean_dx = 0;
                      for (std::size_t c = 0; c < d; ++c) {
                        dxhat[c] = g(i, c) * G[c];
                        mean_d += dxhat[c];
                        mean_dx += dxhat[c] * xhat(i, c);
                      }
                      mean_d /= static_cast<T>(d);
                      mean_dx /= static_cast<T>(d);
                      for (std::size_t c = 0; c < d; ++c)
                        gx(i, c) += inv_std[i] * (dxhat[c] - mean_d - xhat(i, c) * mean_dx);
                    }
                  }
                });
}

/// Attention pooling per span: out_s = sum_j softmax(scores over span s)_j h_j.
/// `scores` is L x 1 aligned with the rows of `h`.
template <typename T>
Var span_softmax_pool(Tape<T>& t, Var h, Var scores, std::vector<TokenSpan> spans) {
  const Tensor<T>& H = t.value(h);
  const Tensor<T>& S = t.value(scores);
  const std::size_t d = H.cols();
  if (S.size() != H.rows()) throw std::invalid_argument("span_softmax_pool: score count mismatch");
  std::vector<T> attn(S.size(), T(0));
  Tensor<T> out = Tensor<T>::matrix(spans.size(), d);
  for (std::size_t s = 0; s < spans.size(); ++s) {
    const auto [start, end] = spans[s];
    if (start >= end || end > H.rows()) throw std::invalid_argument("span_softmax_pool: bad span");
    T mx = S[start];
    for (std::size_t j = start; j < end; ++j) mx = std::max(mx, S[j]);
    T z = 0;
    for (std::size_t j = start; j < end; ++j) z += (attn[j] = std::exp(S[j] - mx));
    for (std::size_t j = start; j < end; ++j) {
      attn[j] /= z;
      for (std::size_t c = 0; c < d; ++c) out(s, c) += attn[j] * H(j, c);
    }
  }
  return t.push(std::move(out), any_grad(t, {h, scores}),
                [h, scores, d, spans = std::move(spans), attn = std::move(attn)](Tape<T>& tp, std::size_t self) {
                  const Tensor<T>& g = tp.grad(Var{self});
                  const Tensor<T>& H = tp.value(h);
                  for (std::size_t s = 0; s < spans.size(); ++s) {
                    const auto [start, end] = spans[s];
                    if (tp.requires_grad(h)) {
                      Tensor<T>& gh = tp.grad(h);
                      for (std::size_t j = start; j < end; ++j)
                        for (std::size_t c = 0; c < d; ++c) gh(j, c) += attn[j] * g(s, c);
                    }
                    if (tp.requires_grad(scores)) {
                      Tensor<T>& gs = tp.grad(scores);
                      std::vector<T> da(end - start);
                      T weighted = 0;
                      for (std::size_t j = start; j < end; ++j) {
                        T v = 0;
                        for (std::size_t c = 0; c < d; ++c) v += g(s, c) * H(j, c);
                        da[j - start] = v;
                        weighted += attn[j] * v;
                      }
                      for (std::size_t j = start; j < end; ++j) gs[j] += attn[j] * (da[j - start] - weighted);
                    }
                  }
                });
}

/// out_i = mean of rows N_i of x; zero when N_i is empty.
template <typename T>
Var neighbor_mean(Tape<T>& t, Var x, std::vector<std::vector<std::size_t>> neighbors) {
  const Tensor<T>& X = t.value(x);
  const std::size_t n = X.rows(), d = X.cols();
  if (neighbors.size() != n) throw std::invalid_argument("neighbor_mean: neighbor list count mismatch");
  Tensor<T> out = Tensor<T>::matrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    if (neighbors[i].empty()) continue;
    const T w = T(1) / static_cast<T>(neighbors[i].size());
    for (std::size_t j : neighbors[i]) {
      if (j >= n) throw std::out_of_range("neighbor_mean: neighbor index out of range");
      for (std::size_t c = 0; c < d; ++c) out(i, c) += w * X(j, c);
    }
  }
  return t.push(std::move(out), t.requires_grad(x),
                [x, d, neighbors = std::move(neighbors)](Tape<T>& tp, std::size_t self) {
                  const Tensor<T>& g = tp.grad(Var{self});
                  Tensor<T>& gx = tp.grad(x);
                  for (std::size_t i = 0; i < neighbors.size(); ++i) {
                    if (neighbors[i].empty()) continue;
                    const T w = T(1) / static_cast<T>(neighbors[i].size());
                    for (std::size_t j : neighbors[i])
                      for (std::size_t c = 0; c < d; ++c) gx(j, c) += w * g(i, c);
                  }
                });
}

/// [a | b] along columns.
template <typename T>
Var concat_cols(Tape<T>& t, Var a, Var b) {
  const Tensor<T>& A = t.value(a);
  const Tensor<T>& B = t.value(b);
  if (A.rows() != B.rows()) throw std::invalid_argument("concat_cols: row count mismatch");
  const std::size_t m = A.rows(), da = A.cols(), db = B.cols();
  Tensor<T> out = Tensor<T>::matrix(m, da + db);
  for (std::size_t i = 0; i < m; ++i) {
    std::copy_n(A.row(i).begin(), da, out.row(i).begin());
    std::copy_n(B.row(i).begin(), db, out.row(i).begin() + static_cast<std::ptrdiff_t>(da));
  }
  return t.push(std::move(out), any_grad(t, {a, b}), [a, b, m, da, db](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.grad(Var{self});
    if (tp.requires_grad(a)) {
      Tensor<T>& ga = tp.grad(a);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t c = 0; c < da; ++c) ga(i, c) += g(i, c);
    }
    if (tp.requires_grad(b)) {
      Tensor<T>& gb = tp.grad(b);
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t c = 0; c < db; ++c) gb(i, c) += g(i, da + c);
    }
  });
}

template <typename T>
Var sigmoid(Tape<T>& t, Var x) {
  Tensor<T> out = t.value(x);
  for (auto& v : out.data()) v = T(1) / (T(1) + std::exp(-v));
  return t.push(std::move(out), t.requires_grad(x), [x](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.grad(Var{self});
    const Tensor<T>& y = tp.value(Var{self});
    Tensor<T>& gx = tp.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (T(1) - y[i]);
  });
}

/// -sum_i (y_i log p_i + (1 - y_i) log(1 - p_i)) with p clamped to
/// [eps, 1 - eps]; the clamp passes no gradient.
template <typename T>
Var binary_cross_entropy(Tape<T>& t, Var probs, std::vector<T> targets, double eps = 1e-7) {
  const Tensor<T>& P = t.value(probs);
  if (P.size() != targets.size()) throw std::invalid_argument("binary_cross_entropy: target count mismatch");
  const T lo = static_cast<T>(eps), hi = T(1) - static_cast<T>(eps);
  T loss = 0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    const T p = std::clamp(P[i], lo, hi);
    loss -= targets[i] * std::log(p) + (T(1) - targets[i]) * std::log(T(1) - p);
  }
  return t.push(Tensor<T>({1}, std::vector<T>{loss}), t.requires_grad(probs),
                [probs, lo, hi, targets = std::move(targets)](Tape<T>& tp, std::size_t self) {
                  const T g = tp.grad(Var{self})[0];
                  const Tensor<T>& P = tp.value(probs);
                  Tensor<T>& gp = tp.grad(probs);
                  for (std::size_t i = 0; i < P.size(); ++i) {
                    if (P[i] < lo || P[i] > hi) continue;
                    gp[i] += g * (-targets[i] / P[i] + (T(1) - targets[i]) / (T(1) - P[i]));
                  }
                });
}

}  // namespace ops
}  // namespace discosum::nn
