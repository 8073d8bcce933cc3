#pragma once

#include <optional>
#include <span>

#include "weseg/types.hpp"

namespace weseg {

struct LabelCounts {
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

// Number of tiles assigned 1 (top of the ranking) and 0 (bottom) for a slide
// of n tiles annotated with `percent`, after shrinking both sets by the
// margins. Counts round half-up and never overlap: n_pos + n_neg <= n.
// With all-zero margins the negatives take every remaining tile.
LabelCounts percentile_counts(std::size_t n, double percent, const Margins& margins);

// Rank the current predictions and hand out proxy targets: the n_pos highest
// probabilities get 1, the n_neg lowest get 0, the band between is masked
// out. Ties rank by ascending original index. Rejects non-finite inputs.
ProxyTarget assign_weseg(std::span<const double> probs, double percent,
                         const Margins& margins);

// Fixed-fraction baseline: slides labeled 0 get all-zero targets; slides
// labeled 1 get the top alpha% as 1, the bottom beta% as 0, the rest masked.
// Requires alpha + beta <= 100.
ProxyTarget assign_alphabeta(std::span<const double> probs, int slide_label,
                             double alpha, double beta);

// Emulated supervision: usable only when the annotation is exactly 0 or 100,
// in which case every tile gets the corresponding target. Returns nullopt
// otherwise (slide excluded from this baseline's training set).
std::optional<ProxyTarget> supervised_targets(const SlideBag& bag);

}  // namespace weseg
