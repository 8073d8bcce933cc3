#include "weseg/types.hpp"

#include <stdexcept>

namespace weseg {

void SlideBag::validate() const {
  if (features.rows == 0) {
    throw std::invalid_argument("slide '" + id + "': needs at least one tile");
  }
  if (features.data.size() != features.rows * features.cols) {
    throw std::invalid_argument("slide '" + id + "': feature storage mismatch");
  }
  if (percent < 0.0 || percent > 100.0) {
    throw std::invalid_argument("slide '" + id + "': percent outside [0, 100]");
  }
  if (slide_label && *slide_label != 0 && *slide_label != 1) {
    throw std::invalid_argument("slide '" + id + "': slide_label must be 0 or 1");
  }
  if (percent == 0.0 && slide_label && *slide_label != 0) {
    throw std::invalid_argument("slide '" + id +
                                "': percent 0 requires slide_label 0");
  }
  if (truth && truth->size() != features.rows) {
    throw std::invalid_argument("slide '" + id + "': truth length != tile count");
  }
}

std::size_t ProxyTarget::masked_in_count() const {
  std::size_t n = 0;
  for (auto m : mask) n += (m != 0);
  return n;
}

std::size_t ProxyTarget::count(std::uint8_t target_value) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (mask[i] != 0 && targets[i] == target_value) ++n;
  }
  return n;
}

void Margins::validate() const {
  if (r_low < 0.0 || r_high < 0.0 || a_low < 0.0 || a_high < 0.0) {
    throw std::invalid_argument("margins must be non-negative");
  }
}

std::size_t Cohort::tile_total() const {
  std::size_t n = 0;
  for (const auto& s : slides) n += s.tile_count();
  return n;
}

}  // namespace weseg
