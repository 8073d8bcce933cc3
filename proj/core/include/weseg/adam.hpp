#pragma once

#include <cstdint>

#include "weseg/model.hpp"

namespace weseg {

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

struct AdamState {
  ModelParams m;  // first moments, shaped like the params
  ModelParams v;  // second moments
  std::int64_t t = 0;
};

AdamState make_adam_state(const ModelParams& params);

// Standard bias-corrected Adam update in place. Returns false and leaves
// params and state untouched when any gradient entry is non-finite (the
// caller decides whether to abort or skip). lr = 0 is the identity.
bool adam_step(ModelParams& params, const ModelParams& grads, AdamState& state,
               double lr);

}  // namespace weseg
