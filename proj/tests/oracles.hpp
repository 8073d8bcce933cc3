#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "weseg/types.hpp"

namespace testutil {

// Pairwise-counting rank: position of probs[i] in descending order with
// ascending-index tie break. No sort involved, so it checks the production
// labelers through an unrelated computation.
inline std::vector<std::size_t> pairwise_ranks(std::span<const double> probs) {
  const std::size_t n = probs.size();
  std::vector<std::size_t> rank(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (probs[j] > probs[i] || (probs[j] == probs[i] && j < i)) ++rank[i];
    }
  }
  return rank;
}

inline weseg::ProxyTarget oracle_assign(std::span<const double> probs,
                                        std::size_t n_pos, std::size_t n_neg) {
  const std::size_t n = probs.size();
  const auto rank = pairwise_ranks(probs);
  weseg::ProxyTarget t;
  t.targets.assign(n, 0);
  t.mask.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (rank[i] < n_pos) {
      t.targets[i] = 1;
      t.mask[i] = 1;
    } else if (rank[i] >= n - n_neg) {
      t.targets[i] = 0;
      t.mask[i] = 1;
    }
  }
  return t;
}

inline bool targets_equal(const weseg::ProxyTarget& a, const weseg::ProxyTarget& b) {
  if (a.mask != b.mask) return false;
  for (std::size_t i = 0; i < a.mask.size(); ++i) {
    if (a.mask[i] && a.targets[i] != b.targets[i]) return false;
  }
  return true;
}

// All-pairs Mann-Whitney AUC: concordant + half the ties over pos*neg pairs.
inline std::optional<double> pair_counting_auc(std::span<const double> scores,
                                               std::span<const std::uint8_t> labels) {
  double concordant = 0.0, tied = 0.0;
  std::size_t n_pos = 0, n_neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] ? ++n_pos : ++n_neg;
  }
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      if (scores[i] > scores[j]) concordant += 1.0;
      else if (scores[i] == scores[j]) tied += 1.0;
    }
  }
  return (concordant + 0.5 * tied) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace testutil
