#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "weseg/image.hpp"
#include "weseg/types.hpp"

namespace weseg {

inline constexpr std::size_t kDefaultTileSize = 512;
inline constexpr std::size_t kDefaultOverlap = 128;
inline constexpr std::size_t kFeatureDim = 30;

struct TilePos {
  std::size_t x = 0;
  std::size_t y = 0;
};

// Deterministic geometry of overlapping tiles over a raster. Positions are
// sorted row-major; the last tile per axis is clamped to the image edge so
// every pixel is covered.
struct TileGrid {
  std::size_t image_width = 0;
  std::size_t image_height = 0;
  std::size_t tile_size = kDefaultTileSize;
  std::size_t overlap = kDefaultOverlap;
  std::vector<TilePos> positions;

  std::size_t tile_count() const { return positions.size(); }
};

// Stride between tile origins is tile_size - overlap. Throws when the tile
// does not fit or the stride is not positive.
TileGrid tile_grid(std::size_t width, std::size_t height,
                   std::size_t tile_size = kDefaultTileSize,
                   std::size_t overlap = kDefaultOverlap);

RgbImage crop(const RgbImage& image, const TilePos& pos, std::size_t tile_size);

// A tile is background when at least 90% of its pixels have all three
// channels strictly above 200.
bool is_background(const RgbImage& tile);

// Per-channel 8-bin normalized intensity histograms plus per-channel
// mean/std, all scaled into [0,1]; D = 30.
std::vector<double> extract_features(const RgbImage& tile);

RgbImage flip_horizontal(const RgbImage& tile);
RgbImage flip_vertical(const RgbImage& tile);

// Tiling + background filter + feature extraction in one pass.
struct TiledSlide {
  TileGrid grid;
  std::vector<std::uint8_t> background;  // one flag per grid position
  Matrix features;                       // one row per non-background tile
  std::vector<std::size_t> tile_index;   // grid position of each feature row
};

TiledSlide tile_slide(const RgbImage& image,
                      std::size_t tile_size = kDefaultTileSize,
                      std::size_t overlap = kDefaultOverlap);

// Per-pixel mean of the scores of covering non-background tiles. Pixels
// covered only by background tiles carry value 0 and background flag 255.
struct SegmentationMap {
  FloatMap probabilities;
  GrayImage background;  // 255 = no tissue tile covers this pixel
};

SegmentationMap stitch_map(const TileGrid& grid,
                           std::span<const std::uint8_t> background_flags,
                           std::span<const double> tile_scores);

}  // namespace weseg
