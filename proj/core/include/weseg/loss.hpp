#pragma once

#include <span>
#include <vector>

#include "weseg/types.hpp"

namespace weseg {

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Probabilities are clipped into [kProbEps, 1 - kProbEps] before the log.
inline constexpr double kProbEps = 1e-7;

// Binary cross-entropy over the masked-in tiles, normalized by their count.
// grad[i] is the derivative of the normalized sum w.r.t. probs[i] (zero on
// masked-out tiles). An all-zero mask yields loss 0, zero grad, and a
// diagnostic on stderr.
LossGrad masked_bce(std::span<const double> probs, const ProxyTarget& target);

}  // namespace weseg
