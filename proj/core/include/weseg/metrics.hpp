#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "weseg/types.hpp"

namespace weseg {

// Mann-Whitney AUC in O(n log n): (concordant + 0.5 * tied) / (n_pos * n_neg).
// Undefined (nullopt) when only one class is present.
std::optional<double> auc(std::span<const double> scores,
                          std::span<const std::uint8_t> labels);

// ROC polyline from (0,0) to (1,1), one vertex per distinct score threshold.
struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};
std::vector<RocPoint> roc_points(std::span<const double> scores,
                                 std::span<const std::uint8_t> labels);

// Fraction of the remaining error closed relative to a reference method.
double error_reduction(double auc_value, double auc_ref);

struct SlideAuc {
  std::string id;
  std::optional<double> value;
};

struct CohortReport {
  std::string method;
  std::string cohort;
  std::optional<double> pooled_auc;      // over all tiles of all slides jointly
  std::optional<double> mean_slide_auc;  // over slides with both classes
  std::vector<SlideAuc> per_slide;
  std::size_t skipped_single_class = 0;
};

// Scores carry one vector per slide, aligned with the cohort's tile order.
// Every slide must have truth.
CohortReport eval_cohort(const std::string& method, const Cohort& cohort,
                         const std::vector<std::vector<double>>& slide_scores);

struct AnnotationStats {
  std::size_t total = 0;
  std::size_t nonzero = 0;
  std::size_t multiple_of_5 = 0;   // among nonzero, after rounding to integer
  std::size_t multiple_of_20 = 0;
  std::array<std::size_t, 101> histogram{};  // rounded percent -> count

  double incidence_5() const;
  double incidence_20() const;
};

AnnotationStats annotation_stats(const Cohort& cohort);
AnnotationStats annotation_stats(std::span<const double> percents);

}  // namespace weseg
