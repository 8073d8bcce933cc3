#pragma once

#include <cstdint>
#include <functional>

#include "weseg/model.hpp"

namespace weseg {

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::size_t coords_checked = 0;
};

// Central-difference check of `analytic` against loss_fn around `params`.
// Per-coordinate error is |analytic - numeric| normalized by the largest
// magnitude seen in either gradient (floored at 1e-12). Checks every
// coordinate when max_coords = 0, otherwise a seed-fixed sample of
// max_coords coordinates. loss_fn must be deterministic.
GradCheckResult finite_diff_check(
    const std::function<double(const ModelParams&)>& loss_fn,
    const ModelParams& params, const ModelParams& analytic, double step,
    std::size_t max_coords = 0, std::uint64_t seed = 1234);

}  // namespace weseg
