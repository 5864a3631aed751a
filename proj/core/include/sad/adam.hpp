// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <vector>

#include "sad/nets/params.hpp"

namespace sad {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step = 0;

  bool operator==(const AdamState&) const = default;
};

struct AdamOptions {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One bias-corrected Adam update from the gradients currently stored in
/// params. The state is sized on first use.
void adam_step(nets::ModelParams& params, AdamState& state, const AdamOptions& opts);

}  // namespace sad
