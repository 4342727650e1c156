#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>

#include "discosum/nn/params.hpp"
#include "discosum/nn/tape.hpp"

namespace discosum::nn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <std::floating_point T>
struct AdamState {
  std::map<std::string, Tensor<T>> m;
  std::map<std::string, Tensor<T>> v;
  std::size_t step = 0;
};

/// One bias-corrected Adam update. Parameters without a gradient entry and
/// frozen parameters are left untouched.
template <std::floating_point T>
void adam_step(ParamStore<T>& params, const Gradients<T>& grads, AdamState<T>& state, double lr,
               const AdamOptions& opt = {}) {
  ++state.step;
  const double c1 = 1 - std::pow(opt.beta1, static_cast<double>(state.step));
  const double c2 = 1 - std::pow(opt.beta2, static_cast<double>(state.step));
  for (const auto& [name, g] : grads) {
    if (params.frozen(name)) continue;
    Tensor<T>& p = params.at(name);
    if (g.shape() != p.shape()) throw std::invalid_argument("adam_step: gradient shape mismatch for " + name);
    auto [mit, _m] = state.m.try_emplace(name, p.shape());
    auto [vit, _v] = state.v.try_emplace(name, p.shape());
    Tensor<T>& m = mit->second;
    Tensor<T>& v = vit->second;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      const double mi = opt.beta1 * m[i] + (1 - opt.beta1) * gi;
      const double vi = opt.beta2 * v[i] + (1 - opt.beta2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double update = lr * (mi / c1) / (std::sqrt(vi / c2) + opt.epsilon);
      p[i] = static_cast<T>(p[i] - update);
    }
  }
}

}  // namespace discosum::nn
