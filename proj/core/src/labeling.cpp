#include "weseg/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace weseg {

namespace {

double clamp_percent(double x) { return std::clamp(x, 0.0, 100.0); }

// Round-half-up on n * percent / 100.
std::size_t count_for(std::size_t n, double percent) {
  double c = std::floor(static_cast<double>(n) * percent / 100.0 + 0.5);
  return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(n)));
}

// Indices sorted by descending probability, ties by ascending index, so the
// labeling is deterministic for any input.
std::vector<std::size_t> rank_order(std::span<const double> probs) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (probs[a] != probs[b]) return probs[a] > probs[b];
    return a < b;
  });
  return order;
}

void require_finite(std::span<const double> probs) {
  for (double p : probs) {
    if (!std::isfinite(p)) {
      throw std::invalid_argument("probability vector contains non-finite values");
    }
  }
}

ProxyTarget from_counts(std::span<const double> probs, std::size_t n_pos,
                        std::size_t n_neg) {
  const std::size_t n = probs.size();
  ProxyTarget out;
  out.targets.assign(n, 0);
  out.mask.assign(n, 0);
  const auto order = rank_order(probs);
  for (std::size_t r = 0; r < n_pos; ++r) {
    out.targets[order[r]] = 1;
    out.mask[order[r]] = 1;
  }
  for (std::size_t r = n - n_neg; r < n; ++r) {
    out.targets[order[r]] = 0;
    out.mask[order[r]] = 1;
  }
  return out;
}

}  // namespace

LabelCounts percentile_counts(std::size_t n, double percent,
                              const Margins& margins) {
  if (n == 0) throw std::invalid_argument("percentile_counts: n must be >= 1");
  margins.validate();
  LabelCounts c;
  c.n_pos = count_for(n, clamp_percent((1.0 - margins.r_high) * percent -
                                       margins.a_high));
  if (margins.all_zero()) {
    // Margin-free base case: every tile not assigned 1 is assigned 0.
    c.n_neg = n - c.n_pos;
    return c;
  }
  c.n_neg = count_for(n, clamp_percent((1.0 - margins.r_low) * (100.0 - percent) -
                                       margins.a_low));
  if (c.n_pos + c.n_neg > n) c.n_neg = n - c.n_pos;
  return c;
}

ProxyTarget assign_weseg(std::span<const double> probs, double percent,
                         const Margins& margins) {
  require_finite(probs);
  const auto counts = percentile_counts(probs.size(), percent, margins);
  return from_counts(probs, counts.n_pos, counts.n_neg);
}

ProxyTarget assign_alphabeta(std::span<const double> probs, int slide_label,
                             double alpha, double beta) {
  require_finite(probs);
  if (alpha < 0.0 || beta < 0.0 || alpha + beta > 100.0) {
    throw std::invalid_argument("assign_alphabeta: need alpha, beta >= 0 and alpha + beta <= 100");
  }
  const std::size_t n = probs.size();
  if (n == 0) throw std::invalid_argument("assign_alphabeta: empty probability vector");
  if (slide_label == 0) {
    ProxyTarget out;
    out.targets.assign(n, 0);
    out.mask.assign(n, 1);
    return out;
  }
  std::size_t n_pos = count_for(n, alpha);
  std::size_t n_neg = count_for(n, beta);
  if (n_pos + n_neg > n) n_neg = n - n_pos;
  return from_counts(probs, n_pos, n_neg);
}

std::optional<ProxyTarget> supervised_targets(const SlideBag& bag) {
  const std::size_t n = bag.tile_count();
  if (bag.percent == 0.0 || bag.percent == 100.0) {
    ProxyTarget out;
    out.targets.assign(n, bag.percent == 100.0 ? 1 : 0);
    out.mask.assign(n, 1);
    return out;
  }
  return std::nullopt;
}

}  // namespace weseg
