#include "weseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace weseg {

std::optional<double> auc(std::span<const double> scores,
                          std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("auc: scores and labels differ in length");
  }
  const std::size_t n = scores.size();
  std::size_t n_pos = 0;
  for (std::uint8_t l : labels) {
    if (l != 0 && l != 1) throw std::invalid_argument("auc: labels must be 0 or 1");
    n_pos += l;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Average ranks across tied score groups, then the Mann-Whitney statistic
  // from the positive rank sum.
  double pos_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) pos_rank_sum += avg_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

std::vector<RocPoint> roc_points(std::span<const double> scores,
                                 std::span<const std::uint8_t> labels) {
  const std::size_t n = scores.size();
  if (labels.size() != n) throw std::invalid_argument("roc_points: length mismatch");
  std::size_t n_pos = 0;
  for (std::uint8_t l : labels) n_pos += l ? 1 : 0;
  const std::size_t n_neg = n - n_pos;
  std::vector<RocPoint> pts;
  pts.push_back({0.0, 0.0});
  if (n_pos == 0 || n_neg == 0) {
    pts.push_back({1.0, 1.0});
    return pts;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  std::size_t tp = 0, fp = 0, i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]]) ++tp;
      else ++fp;
    }
    pts.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                   static_cast<double>(tp) / static_cast<double>(n_pos)});
    i = j;
  }
  return pts;
}

double error_reduction(double auc_value, double auc_ref) {
  return (auc_value - auc_ref) / (1.0 - auc_ref);
}

CohortReport eval_cohort(const std::string& method, const Cohort& cohort,
                         const std::vector<std::vector<double>>& slide_scores) {
  if (slide_scores.size() != cohort.slides.size()) {
    throw std::invalid_argument("eval_cohort: one score vector per slide required");
  }
  CohortReport report;
  report.method = method;
  report.cohort = cohort.name;

  std::vector<double> pooled_scores;
  std::vector<std::uint8_t> pooled_labels;
  pooled_scores.reserve(cohort.tile_total());
  pooled_labels.reserve(cohort.tile_total());
  double slide_auc_sum = 0.0;
  std::size_t slide_auc_count = 0;
  for (std::size_t s = 0; s < cohort.slides.size(); ++s) {
    const SlideBag& bag = cohort.slides[s];
    if (!bag.truth) {
      throw std::invalid_argument("eval_cohort: slide " + bag.id + " has no truth");
    }
    const auto& scores = slide_scores[s];
    if (scores.size() != bag.tile_count()) {
      throw std::invalid_argument("eval_cohort: score count mismatch on slide " + bag.id);
    }
    pooled_scores.insert(pooled_scores.end(), scores.begin(), scores.end());
    pooled_labels.insert(pooled_labels.end(), bag.truth->begin(), bag.truth->end());
    const auto a = auc(scores, *bag.truth);
    report.per_slide.push_back({bag.id, a});
    if (a) {
      slide_auc_sum += *a;
      ++slide_auc_count;
    } else {
      ++report.skipped_single_class;
    }
  }
  report.pooled_auc = auc(pooled_scores, pooled_labels);
  if (slide_auc_count > 0) {
    report.mean_slide_auc = slide_auc_sum / static_cast<double>(slide_auc_count);
  }
  return report;
}

AnnotationStats annotation_stats(std::span<const double> percents) {
  AnnotationStats st;
  for (double p : percents) {
    ++st.total;
    const long r = std::lround(p);
    if (r >= 0 && r <= 100) ++st.histogram[static_cast<std::size_t>(r)];
    if (p == 0.0) continue;
    ++st.nonzero;
    if (r % 5 == 0) ++st.multiple_of_5;
    if (r % 20 == 0) ++st.multiple_of_20;
  }
  return st;
}

AnnotationStats annotation_stats(const Cohort& cohort) {
  std::vector<double> percents;
  percents.reserve(cohort.slides.size());
  for (const SlideBag& bag : cohort.slides) percents.push_back(bag.percent);
  return annotation_stats(percents);
}

double AnnotationStats::incidence_5() const {
  return nonzero == 0 ? 0.0
                      : static_cast<double>(multiple_of_5) / static_cast<double>(nonzero);
}

double AnnotationStats::incidence_20() const {
  return nonzero == 0 ? 0.0
                      : static_cast<double>(multiple_of_20) / static_cast<double>(nonzero);
}

}  // namespace weseg
