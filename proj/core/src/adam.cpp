#include "weseg/adam.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace weseg {

AdamState make_adam_state(const ModelParams& params) {
  AdamState s;
  s.m = zeros_like(params);
  s.v = zeros_like(params);
  s.t = 0;
  return s;
}

bool adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               double lr) {
  auto p = param_tensors(params);
  auto g = param_tensors(grads);
  auto m = param_tensors(state.m);
  auto v = param_tensors(state.v);
  if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
    throw std::invalid_argument("adam_step: tensor layout mismatch");
  }
  for (std::size_t t = 0; t < p.size(); ++t) {
    if (p[t].size() != g[t].size()) {
      throw std::invalid_argument("adam_step: tensor shape mismatch");
    }
    for (double x : g[t]) {
      if (!std::isfinite(x)) {
        std::fprintf(stderr, "adam_step: non-finite gradient, step rejected\n");
        return false;
      }
    }
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.t));
  for (std::size_t t = 0; t < p.size(); ++t) {
    for (std::size_t i = 0; i < p[t].size(); ++i) {
      const double gi = g[t][i];
      m[t][i] = kAdamBeta1 * m[t][i] + (1.0 - kAdamBeta1) * gi;
      v[t][i] = kAdamBeta2 * v[t][i] + (1.0 - kAdamBeta2) * gi * gi;
      const double mhat = m[t][i] / bc1;
      const double vhat = v[t][i] / bc2;
      p[t][i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
    }
  }
  return true;
}

}  // namespace weseg
