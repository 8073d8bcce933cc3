#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "weseg/metrics.hpp"

namespace weseg {

struct RocSeries {
  std::string label;
  std::vector<RocPoint> points;
};

// Self-contained SVG line plot: axes with 0.2 ticks, chance diagonal, one
// polyline per series with an inline legend. No external assets.
void write_roc_svg(const std::filesystem::path& path, const std::string& title,
                   const std::vector<RocSeries>& series);

}  // namespace weseg
