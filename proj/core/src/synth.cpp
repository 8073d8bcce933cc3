#include "weseg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "weseg/rng.hpp"

namespace weseg {

namespace {

double nearest_multiple(double x, double m) {
  return m * std::floor(x / m + 0.5);
}

std::uint8_t noisy_channel(Rng& rng, int lo, int hi) {
  return static_cast<std::uint8_t>(lo + static_cast<int>(rng.below(
             static_cast<std::uint64_t>(hi - lo + 1))));
}

}  // namespace

double SynthSpec::d_prime() const {
  double ss = 0.0;
  for (std::size_t i = 0; i < dim; ++i) {
    const double d = mu1[i] - mu0[i];
    ss += d * d;
  }
  return std::sqrt(ss) / sigma;
}

void SynthSpec::validate() const {
  if (dim == 0) throw std::invalid_argument("SynthSpec: dim must be positive");
  if (mu0.size() != dim || mu1.size() != dim) {
    throw std::invalid_argument("SynthSpec: mean vectors must have length dim");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("SynthSpec: sigma must be positive");
  if (min_tiles == 0 || max_tiles < min_tiles) {
    throw std::invalid_argument("SynthSpec: bad tile range");
  }
  if (normal_weight < 0.0 || normal_weight > 1.0) {
    throw std::invalid_argument("SynthSpec: normal_weight must be in [0,1]");
  }
  if (!(d_prime() > 0.0)) throw std::invalid_argument("SynthSpec: classes must be separated");
}

SynthSpec default_synth_spec(std::size_t dim, double d_prime, std::uint64_t seed) {
  SynthSpec spec;
  spec.dim = dim;
  spec.mu0.assign(dim, 0.0);
  spec.mu1.assign(dim, d_prime / std::sqrt(static_cast<double>(dim)));
  spec.sigma = 1.0;
  spec.seed = seed;
  spec.validate();
  return spec;
}

std::vector<SlideBag> gen_feature_bags(const SynthSpec& spec, std::size_t count,
                                       std::size_t first_index) {
  spec.validate();
  std::vector<SlideBag> bags;
  bags.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t slide_index = first_index + i;
    Rng rng(spec.seed ^ static_cast<std::uint64_t>(slide_index));
    SlideBag bag;
    bag.id = "slide_" + std::to_string(slide_index);

    const std::size_t n =
        spec.min_tiles + rng.below(spec.max_tiles - spec.min_tiles + 1);
    double percent = 0.0;
    if (rng.next_double() >= spec.normal_weight) {
      percent = 100.0 * rng.next_double_open_zero();  // uniform over (0,100]
    }
    bag.percent = percent;
    bag.slide_label = percent > 0.0 ? 1 : 0;

    const auto n_tumor = static_cast<std::size_t>(
        std::lround(percent * static_cast<double>(n) / 100.0));
    std::vector<std::uint8_t> truth(n, 0);
    std::fill(truth.begin(), truth.begin() + static_cast<std::ptrdiff_t>(n_tumor), 1);
    rng.shuffle(truth);

    bag.features = Matrix(n, spec.dim);
    for (std::size_t t = 0; t < n; ++t) {
      const auto& mu = truth[t] ? spec.mu1 : spec.mu0;
      auto row = bag.features.row(t);
      for (std::size_t j = 0; j < spec.dim; ++j) {
        // float32 quantization keeps in-memory features identical to the
        // stored binary format.
        row[j] = static_cast<float>(mu[j] + spec.sigma * rng.normal());
      }
    }
    bag.truth = std::move(truth);
    bag.validate();
    bags.push_back(std::move(bag));
  }
  return bags;
}

double bayes_score(const SynthSpec& spec, std::span<const double> features) {
  if (features.size() != spec.dim) throw std::invalid_argument("bayes_score: dim mismatch");
  // log N(x; mu1, s^2 I) - log N(x; mu0, s^2 I)
  double score = 0.0;
  const double inv_2s2 = 1.0 / (2.0 * spec.sigma * spec.sigma);
  for (std::size_t j = 0; j < spec.dim; ++j) {
    const double d0 = features[j] - spec.mu0[j];
    const double d1 = features[j] - spec.mu1[j];
    score += (d0 * d0 - d1 * d1) * inv_2s2;
  }
  return score;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double bayes_auc(const SynthSpec& spec) {
  return normal_cdf(spec.d_prime() / std::sqrt(2.0));
}

double perturb_annotation(double percent_true, std::uint64_t noise_seed) {
  if (percent_true < 0.0 || percent_true > 100.0) {
    throw std::invalid_argument("perturb_annotation: percent out of range");
  }
  if (percent_true == 0.0) return 0.0;
  Rng rng(noise_seed);
  double out = percent_true;
  if (rng.next_double() < kNoiseQ20) {
    out = nearest_multiple(percent_true, 20.0);
    if (out == 0.0) {
      out = nearest_multiple(percent_true, 5.0);
      if (out == 0.0) out = 5.0;
    }
  } else if (rng.next_double() < kNoiseQ5) {
    out = nearest_multiple(percent_true, 5.0);
    if (out == 0.0) out = 5.0;
  }
  return std::clamp(out, 0.0, 100.0);
}

RasterSlide gen_raster_slide(const SynthSpec& spec, std::size_t width,
                             std::size_t height, double percent) {
  if (percent < 0.0 || percent > 100.0) {
    throw std::invalid_argument("gen_raster_slide: percent out of range");
  }
  if (width < 8 || height < 8) {
    throw std::invalid_argument("gen_raster_slide: image too small");
  }
  const std::size_t tissue_top = height / 4;
  const std::size_t tumor_w =
      static_cast<std::size_t>(std::lround(percent * static_cast<double>(width) / 100.0));
  const double achieved = 100.0 * static_cast<double>(tumor_w) / static_cast<double>(width);
  if (std::fabs(achieved - percent) > 1.0) {
    throw std::runtime_error("gen_raster_slide: cannot hit " + std::to_string(percent) +
                             "% within 1 point at width " + std::to_string(width));
  }

  Rng rng(spec.seed ^ 0xBA5EBA11ULL);
  RasterSlide slide;
  slide.tissue_top = tissue_top;
  slide.achieved_percent = achieved;
  slide.image = RgbImage(width, height);
  slide.truth = GrayImage(width, height, 0);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      std::uint8_t* px = slide.image.at(x, y);
      if (y < tissue_top) {
        // Near-white: every channel above 200, triggers the background rule.
        px[0] = noisy_channel(rng, 235, 255);
        px[1] = noisy_channel(rng, 235, 255);
        px[2] = noisy_channel(rng, 235, 255);
      } else if (x < tumor_w) {
        // Dark purple tumor texture.
        px[0] = noisy_channel(rng, 100, 140);
        px[1] = noisy_channel(rng, 40, 80);
        px[2] = noisy_channel(rng, 120, 160);
        slide.truth.at(x, y) = 255;
      } else {
        // Lighter benign texture; green stays below 200 so tissue tiles
        // never pass the background rule.
        px[0] = noisy_channel(rng, 150, 190);
        px[1] = noisy_channel(rng, 100, 150);
        px[2] = noisy_channel(rng, 160, 200);
      }
    }
  }
  return slide;
}

}  // namespace weseg
