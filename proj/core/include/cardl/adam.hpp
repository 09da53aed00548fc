#pragma once

#include <cstdint>

#include "cardl/mlp.hpp"

namespace cardl {

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First and second moment estimates shaped like the parameters they track.
struct AdamState {
  std::vector<LayerGrad> first_moment;
  std::vector<LayerGrad> second_moment;
  std::uint64_t step_count = 0;

  static AdamState zeros_like(const MlpParams& params);
};

// One bias-corrected Adam update applied to `params` and `state` in place.
// All gradients are checked before anything is modified, so a NumericError
// leaves both untouched.
void adam_step(MlpParams& params, const GradientSet& grads, AdamState& state,
               const AdamHyper& hyper);

}  // namespace cardl
