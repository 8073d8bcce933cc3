#pragma once

#include <cstdint>
#include <vector>

#include "weseg/image.hpp"
#include "weseg/types.hpp"

namespace weseg {

// Fraction of slides annotated exactly 0 (normal): 2248 of 12783.
inline constexpr double kNormalWeight = 2248.0 / 12783.0;

// Branch probabilities of the annotation-noise model, solved so that over
// uniform non-zero percents the perturbed annotations are multiples of 20
// with probability 0.449 and multiples of 5 with probability 0.891:
//   0.9 q20 + 0.225 (1-q20) q5 + 0.05 (1-q20)(1-q5) = 0.449
//   1.0 q20 + 1.0   (1-q20) q5 + 0.20 (1-q20)(1-q5) = 0.891
inline constexpr double kNoiseQ20 = 7931.0 / 21600.0;
inline constexpr double kNoiseQ5 = 10726.0 / 13669.0;

// Class-conditional diagonal Gaussian tile features. Tumor tiles draw from
// N(mu1, sigma^2 I), benign from N(mu0, sigma^2 I); separability
// d' = |mu1 - mu0| / sigma sets the Bayes AUC at Phi(d' / sqrt(2)).
struct SynthSpec {
  std::size_t dim = 30;
  std::vector<double> mu0;
  std::vector<double> mu1;
  double sigma = 1.0;
  std::size_t min_tiles = 40;
  std::size_t max_tiles = 120;
  double normal_weight = kNormalWeight;  // point mass of percent = 0
  std::uint64_t seed = 1;

  double d_prime() const;
  void validate() const;
};

// Means separated by d_prime * sigma along the all-ones direction.
SynthSpec default_synth_spec(std::size_t dim, double d_prime, std::uint64_t seed);

// `count` bags with exact per-tile truth; slide i derives its generator from
// seed ^ (first_index + i), so cohorts can be produced independently or in
// parallel. Features pass through float32 so they round-trip the on-disk
// format bit-exactly.
std::vector<SlideBag> gen_feature_bags(const SynthSpec& spec, std::size_t count,
                                       std::size_t first_index = 0);

// Log-density difference (tumor minus benign) of a feature vector under the
// spec; the Bayes-optimal tile score.
double bayes_score(const SynthSpec& spec, std::span<const double> features);

// Closed-form AUC of the Bayes-optimal scorer.
double bayes_auc(const SynthSpec& spec);

// Standard normal CDF.
double normal_cdf(double x);

// Noisy re-annotation: 0 stays 0; otherwise round to the nearest multiple of
// 20 with probability q20, else of 5 with probability q5, else keep. A result
// of 0 is re-mapped to the nearest non-zero multiple of 5 so noise never
// fabricates a normal slide; the perturbation never moves an annotation by
// more than 10 points.
double perturb_annotation(double percent_true, std::uint64_t noise_seed);

// Synthetic raster: near-white background strip on top, tissue below, tumor
// texture on the left `percent` of the tissue width. Truth mask is 255 on
// tumor pixels. Throws when the layout cannot hit `percent` within 1 point.
struct RasterSlide {
  RgbImage image;
  GrayImage truth;  // 255 = tumor
  std::size_t tissue_top = 0;
  double achieved_percent = 0.0;
};

RasterSlide gen_raster_slide(const SynthSpec& spec, std::size_t width,
                             std::size_t height, double percent);

}  // namespace weseg
