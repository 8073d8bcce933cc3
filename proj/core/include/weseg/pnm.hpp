#pragma once

#include <filesystem>

#include "weseg/image.hpp"

namespace weseg {

// Binary NetPBM with maxval 255. Readers reject other maxvals and formats.
void write_ppm(const std::filesystem::path& path, const RgbImage& image);
RgbImage read_ppm(const std::filesystem::path& path);

void write_pgm(const std::filesystem::path& path, const GrayImage& image);
GrayImage read_pgm(const std::filesystem::path& path);

// Lossless sidecar: 16-byte header (two little-endian uint64 width, height)
// followed by row-major little-endian float64 values.
void write_float_map(const std::filesystem::path& path, const FloatMap& map);
FloatMap read_float_map(const std::filesystem::path& path);

}  // namespace weseg
