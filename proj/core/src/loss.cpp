#include "weseg/loss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace weseg {

LossGrad masked_bce(std::span<const double> probs, const ProxyTarget& target) {
  const std::size_t n = probs.size();
  if (target.targets.size() != n || target.mask.size() != n) {
    throw std::invalid_argument("masked_bce: size mismatch between probs and target");
  }
  LossGrad out;
  out.grad.assign(n, 0.0);
  const std::size_t m = target.masked_in_count();
  if (m == 0) {
    std::fprintf(stderr, "masked_bce: all tiles masked out, no error signal\n");
    out.loss = 0.0;
    return out;
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!target.mask[i]) continue;
    const double p = std::clamp(probs[i], kProbEps, 1.0 - kProbEps);
    const double y = static_cast<double>(target.targets[i]);
    total += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    // d/dp of -(y log p + (1-y) log(1-p)), averaged over masked-in tiles.
    out.grad[i] = (p - y) / (p * (1.0 - p)) * inv_m;
  }
  out.loss = total * inv_m;
  return out;
}

}  // namespace weseg
