#pragma once

#include <filesystem>
#include <optional>

#include "weseg/model.hpp"
#include "weseg/standardize.hpp"

namespace weseg {

// Model parameters plus the feature standardizer they were trained under,
// so inference reproduces the training-time input scaling.
struct Checkpoint {
  ModelParams params;
  std::optional<Standardizer> standardizer;
};

// Versioned, field-ordered text document. Floats are written with 17
// significant digits, which round-trips IEEE 754 doubles bit-exactly.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace weseg
