#include "weseg/tiler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace weseg {

namespace {

std::vector<std::size_t> axis_positions(std::size_t dim, std::size_t tile,
                                        std::size_t stride) {
  std::vector<std::size_t> out;
  const std::size_t last = dim - tile;
  for (std::size_t p = 0;; p += stride) {
    if (p >= last) {
      out.push_back(last);
      break;
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace

TileGrid tile_grid(std::size_t width, std::size_t height, std::size_t tile_size,
                   std::size_t overlap) {
  if (tile_size == 0) throw std::invalid_argument("tile_grid: tile_size must be positive");
  if (width < tile_size || height < tile_size) {
    throw std::invalid_argument("tile_grid: image smaller than tile (" +
                                std::to_string(width) + "x" + std::to_string(height) +
                                " vs " + std::to_string(tile_size) + ")");
  }
  if (overlap >= tile_size) {
    throw std::invalid_argument("tile_grid: overlap must leave a positive stride");
  }
  const std::size_t stride = tile_size - overlap;
  TileGrid grid;
  grid.image_width = width;
  grid.image_height = height;
  grid.tile_size = tile_size;
  grid.overlap = overlap;
  const auto xs = axis_positions(width, tile_size, stride);
  const auto ys = axis_positions(height, tile_size, stride);
  grid.positions.reserve(xs.size() * ys.size());
  for (std::size_t y : ys) {
    for (std::size_t x : xs) grid.positions.push_back(TilePos{x, y});
  }
  return grid;
}

RgbImage crop(const RgbImage& image, const TilePos& pos, std::size_t tile_size) {
  if (pos.x + tile_size > image.width || pos.y + tile_size > image.height) {
    throw std::invalid_argument("crop out of bounds");
  }
  RgbImage tile(tile_size, tile_size);
  for (std::size_t y = 0; y < tile_size; ++y) {
    const std::uint8_t* src = image.at(pos.x, pos.y + y);
    std::copy(src, src + 3 * tile_size, tile.at(0, y));
  }
  return tile;
}

bool is_background(const RgbImage& tile) {
  const std::size_t total = tile.width * tile.height;
  if (total == 0) return true;
  std::size_t bright = 0;
  for (std::size_t i = 0; i < total; ++i) {
    const std::uint8_t* p = tile.pixels.data() + 3 * i;
    if (p[0] > 200 && p[1] > 200 && p[2] > 200) ++bright;
  }
  // bright / total >= 0.9 in exact integer arithmetic.
  return bright * 10 >= total * 9;
}

std::vector<double> extract_features(const RgbImage& tile) {
  const std::size_t total = tile.width * tile.height;
  if (total == 0) throw std::invalid_argument("extract_features: empty tile");
  std::vector<double> out(kFeatureDim, 0.0);
  double sum[3] = {0, 0, 0};
  double sumsq[3] = {0, 0, 0};
  for (std::size_t i = 0; i < total; ++i) {
    const std::uint8_t* p = tile.pixels.data() + 3 * i;
    for (int c = 0; c < 3; ++c) {
      const double v = p[c];
      out[8 * c + (p[c] >> 5)] += 1.0;
      sum[c] += v;
      sumsq[c] += v * v;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(total);
  for (int c = 0; c < 3; ++c) {
    for (int b = 0; b < 8; ++b) out[8 * c + b] *= inv_n;
    const double mean = sum[c] * inv_n;
    const double var = std::max(0.0, sumsq[c] * inv_n - mean * mean);
    out[24 + c] = mean / 255.0;
    out[27 + c] = std::sqrt(var) / 255.0;
  }
  return out;
}

RgbImage flip_horizontal(const RgbImage& tile) {
  RgbImage out(tile.width, tile.height);
  for (std::size_t y = 0; y < tile.height; ++y) {
    for (std::size_t x = 0; x < tile.width; ++x) {
      const std::uint8_t* src = tile.at(tile.width - 1 - x, y);
      std::copy(src, src + 3, out.at(x, y));
    }
  }
  return out;
}

RgbImage flip_vertical(const RgbImage& tile) {
  RgbImage out(tile.width, tile.height);
  for (std::size_t y = 0; y < tile.height; ++y) {
    const std::uint8_t* src = tile.at(0, tile.height - 1 - y);
    std::copy(src, src + 3 * tile.width, out.at(0, y));
  }
  return out;
}

TiledSlide tile_slide(const RgbImage& image, std::size_t tile_size, std::size_t overlap) {
  TiledSlide out;
  out.grid = tile_grid(image.width, image.height, tile_size, overlap);
  const std::size_t n = out.grid.tile_count();
  out.background.assign(n, 0);
  std::vector<std::vector<double>> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const RgbImage tile = crop(image, out.grid.positions[i], tile_size);
    if (is_background(tile)) {
      out.background[i] = 1;
      continue;
    }
    rows.push_back(extract_features(tile));
    out.tile_index.push_back(i);
  }
  out.features = Matrix(rows.size(), kFeatureDim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), out.features.row(i).begin());
  }
  return out;
}

SegmentationMap stitch_map(const TileGrid& grid,
                           std::span<const std::uint8_t> background_flags,
                           std::span<const double> tile_scores) {
  if (background_flags.size() != grid.tile_count()) {
    throw std::invalid_argument("stitch_map: one background flag per tile required");
  }
  std::size_t tissue = 0;
  for (const std::uint8_t b : background_flags) tissue += b ? 0 : 1;
  if (tile_scores.size() != tissue) {
    throw std::invalid_argument("stitch_map: expected " + std::to_string(tissue) +
                                " scores, got " + std::to_string(tile_scores.size()));
  }

  // Map each grid position to its score, then accumulate in canonical
  // row-major position order so tile order cannot change the result.
  std::vector<double> score_at(grid.tile_count(), 0.0);
  std::size_t next = 0;
  for (std::size_t i = 0; i < grid.tile_count(); ++i) {
    if (!background_flags[i]) score_at[i] = tile_scores[next++];
  }
  std::vector<std::size_t> order(grid.tile_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const TilePos& pa = grid.positions[a];
    const TilePos& pb = grid.positions[b];
    if (pa.y != pb.y) return pa.y < pb.y;
    if (pa.x != pb.x) return pa.x < pb.x;
    return a < b;
  });

  SegmentationMap map;
  map.probabilities = FloatMap(grid.image_width, grid.image_height, 0.0);
  map.background = GrayImage(grid.image_width, grid.image_height, 255);
  std::vector<std::uint32_t> cover(grid.image_width * grid.image_height, 0);
  for (std::size_t oi : order) {
    if (background_flags[oi]) continue;
    const TilePos& pos = grid.positions[oi];
    const double s = score_at[oi];
    for (std::size_t y = pos.y; y < pos.y + grid.tile_size; ++y) {
      double* prow = map.probabilities.values.data() + y * grid.image_width;
      std::uint32_t* crow = cover.data() + y * grid.image_width;
      for (std::size_t x = pos.x; x < pos.x + grid.tile_size; ++x) {
        prow[x] += s;
        crow[x] += 1;
      }
    }
  }
  for (std::size_t i = 0; i < cover.size(); ++i) {
    if (cover[i] > 0) {
      map.probabilities.values[i] /= static_cast<double>(cover[i]);
      map.background.pixels[i] = 0;
    }
  }
  return map;
}

}  // namespace weseg
