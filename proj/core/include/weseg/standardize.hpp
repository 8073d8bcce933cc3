#pragma once

#include <vector>

#include "weseg/types.hpp"

namespace weseg {

// Per-dimension affine rescaling (x - mean) / std fitted on training tiles.
// Population statistics; dimensions with zero spread get std 1 so the
// transform stays total.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> std_dev;

  std::size_t dim() const { return mean.size(); }
  void apply(Matrix& features) const;
  Matrix applied(const Matrix& features) const;
};

// Fits over every tile of every slide in the cohort. Requires at least one
// slide and two tiles in total.
Standardizer fit_standardizer(const Cohort& cohort);

}  // namespace weseg
