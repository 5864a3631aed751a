// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "sad/adam.hpp"

#include <cmath>

#include "sad/error.hpp"

namespace sad {

void adam_step(nets::ModelParams& params, AdamState& state, const AdamOptions& opts) {
  const std::size_t n = params.count();
  if (state.m.empty() && state.v.empty()) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
  }
  if (state.m.size() != n || state.v.size() != n)
    throw InvalidInput("adam: optimizer state does not match parameter count");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(opts.beta1, t);
  const double c2 = 1.0 - std::pow(opts.beta2, t);
  std::size_t k = 0;
  for (auto& p : params)
    for (std::size_t i = 0; i < p.size(); ++i, ++k) {
      const double g = p.grad[i];
      state.m[k] = opts.beta1 * state.m[k] + (1.0 - opts.beta1) * g;
      state.v[k] = opts.beta2 * state.v[k] + (1.0 - opts.beta2) * g * g;
      const double mh = state.m[k] / c1;
      const double vh = state.v[k] / c2;
      p.value[i] -= opts.learning_rate * mh / (std::sqrt(vh) + opts.eps);
    }
}

}  // namespace sad
