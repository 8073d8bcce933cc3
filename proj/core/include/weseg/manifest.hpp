#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "weseg/types.hpp"

namespace weseg {

// Tile features on disk: "WSF1" magic, uint16 tile count, uint16 feature
// dim, then row-major little-endian float32 values.
void write_features(const std::filesystem::path& path, const Matrix& features);
Matrix read_features(const std::filesystem::path& path);

// Per-tile truth: "WST1" magic, uint16 tile count, uint16 zero, then one
// byte per tile in {0,1}.
void write_truth(const std::filesystem::path& path,
                 const std::vector<std::uint8_t>& truth);
std::vector<std::uint8_t> read_truth(const std::filesystem::path& path);

// One manifest line per slide; file paths are relative to the manifest.
struct ManifestEntry {
  std::string id;
  double percent = 0.0;       // the training annotation (noisy when enabled)
  double true_percent = 0.0;  // generator value, for reference only
  int label = 0;
  std::string features_path;
  std::string truth_path;  // empty when absent
  std::string image_path;  // empty when absent
};

struct CohortManifest {
  std::string name;
  std::vector<ManifestEntry> entries;
};

void write_manifest(const std::filesystem::path& path, const CohortManifest& manifest);
CohortManifest read_manifest(const std::filesystem::path& path);

// Loads every slide of a manifest into memory (features + truth when
// present). Paths resolve relative to the manifest location.
Cohort load_cohort(const std::filesystem::path& manifest_path);

// Writes a generated cohort: features under <dir>/features, truths under
// <dir>/truth, and <dir>/<name>.manifest tying them together.
CohortManifest store_cohort(const std::filesystem::path& dir, const Cohort& cohort,
                            const std::vector<double>& true_percents);

}  // namespace weseg
