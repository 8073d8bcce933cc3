#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace weseg {

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// One slide: an ordered bag of tile feature vectors plus its weak annotation.
// `truth` carries per-tile labels for evaluation only; it never feeds training.
struct SlideBag {
  std::string id;
  Matrix features;  // tile_count x dim
  double percent = 0.0;
  std::optional<int> slide_label;            // 0 = normal, 1 = tumor-bearing
  std::optional<std::vector<std::uint8_t>> truth;

  std::size_t tile_count() const { return features.rows; }
  std::size_t dim() const { return features.cols; }

  // Binary label for bag-level methods: stored label if present, else
  // derived as percent > 0.
  int binary_label() const {
    if (slide_label) return *slide_label;
    return percent > 0.0 ? 1 : 0;
  }

  // Throws std::invalid_argument on any invariant breach.
  void validate() const;
};

// Per-tile {0,1} training targets plus an inclusion mask. Tiles with
// mask 0 carry no error signal.
struct ProxyTarget {
  std::vector<std::uint8_t> targets;
  std::vector<std::uint8_t> mask;

  std::size_t size() const { return targets.size(); }
  std::size_t masked_in_count() const;
  std::size_t count(std::uint8_t target_value) const;  // masked-in tiles only
};

// Uncertainty margins around the annotation. Relative margins r_* are
// dimensionless, absolute margins a_* are percentage points. All zero
// reproduces the margin-free labeler exactly.
struct Margins {
  double r_low = 0.0;
  double r_high = 0.0;
  double a_low = 0.0;
  double a_high = 0.0;

  bool all_zero() const {
    return r_low == 0.0 && r_high == 0.0 && a_low == 0.0 && a_high == 0.0;
  }
  void validate() const;
};

struct Cohort {
  std::string name;
  std::vector<SlideBag> slides;

  std::size_t tile_total() const;
};

}  // namespace weseg
