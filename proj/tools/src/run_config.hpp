#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "weseg/synth.hpp"
#include "weseg/train.hpp"

namespace weseg::cli {

struct DataConfig {
  std::size_t dim = 30;
  double d_prime = 2.0;
  double sigma = 1.0;
  std::size_t min_tiles = 40;
  std::size_t max_tiles = 120;
  double normal_weight = kNormalWeight;
  std::size_t count = 100;
  std::array<double, 3> split{0.7, 0.1, 0.2};
  bool noise = true;
  std::size_t rasters = 0;
  std::size_t raster_width = 768;
  std::size_t raster_height = 768;
};

struct RunConfig {
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0 = hardware default
  DataConfig data;
  TrainConfig train;
  std::size_t trials = 8;
};

// Missing file -> defaults; unknown keys anywhere -> error naming the key.
RunConfig load_run_config(const std::optional<std::filesystem::path>& file);

// Flag > WESEG_SEED env > config file > default.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> method;
  std::optional<double> lr;
  std::optional<std::size_t> trials;
};

void apply_overrides(RunConfig& cfg, const Overrides& o);

// Fully serialized copy, every field explicit.
void write_run_config(const std::filesystem::path& path, const RunConfig& cfg);

}  // namespace weseg::cli
