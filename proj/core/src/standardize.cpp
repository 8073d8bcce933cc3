#include "weseg/standardize.hpp"

#include <cmath>
#include <stdexcept>

namespace weseg {

void Standardizer::apply(Matrix& features) const {
  if (features.cols != dim()) {
    throw std::invalid_argument("standardizer dim mismatch");
  }
  for (std::size_t i = 0; i < features.rows; ++i) {
    auto row = features.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = (row[j] - mean[j]) / std_dev[j];
    }
  }
}

Matrix Standardizer::applied(const Matrix& features) const {
  Matrix out = features;
  apply(out);
  return out;
}

Standardizer fit_standardizer(const Cohort& cohort) {
  if (cohort.slides.empty()) throw std::invalid_argument("fit_standardizer: empty cohort");
  const std::size_t d = cohort.slides.front().dim();
  const std::size_t total = cohort.tile_total();
  if (total < 2) throw std::invalid_argument("fit_standardizer: need at least 2 tiles");

  Standardizer s;
  s.mean.assign(d, 0.0);
  s.std_dev.assign(d, 0.0);
  for (const SlideBag& bag : cohort.slides) {
    if (bag.dim() != d) throw std::invalid_argument("fit_standardizer: mixed dims");
    for (std::size_t i = 0; i < bag.tile_count(); ++i) {
      const auto row = bag.features.row(i);
      for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
    }
  }
  const double inv_n = 1.0 / static_cast<double>(total);
  for (double& m : s.mean) m *= inv_n;
  for (const SlideBag& bag : cohort.slides) {
    for (std::size_t i = 0; i < bag.tile_count(); ++i) {
      const auto row = bag.features.row(i);
      for (std::size_t j = 0; j < d; ++j) {
        const double c = row[j] - s.mean[j];
        s.std_dev[j] += c * c;
      }
    }
  }
  for (double& v : s.std_dev) {
    v = std::sqrt(v * inv_n);
    if (v == 0.0) v = 1.0;
  }
  return s;
}

}  // namespace weseg
