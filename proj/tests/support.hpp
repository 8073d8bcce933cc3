#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "weseg/model.hpp"
#include "weseg/rng.hpp"
#include "weseg/types.hpp"

namespace testutil {

// Scratch directory under the system temp root, wiped on entry and exit.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() / ("weseg_test_" + tag);
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline weseg::Matrix random_matrix(std::size_t rows, std::size_t cols, weseg::Rng& rng,
                                   double lo = -1.0, double hi = 1.0) {
  weseg::Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

inline std::vector<double> random_probs(std::size_t n, weseg::Rng& rng) {
  std::vector<double> p(n);
  for (double& v : p) v = rng.next_double();
  return p;
}

inline bool bitwise_equal(const weseg::ModelParams& a, const weseg::ModelParams& b) {
  const auto ta = weseg::param_tensors(a);
  const auto tb = weseg::param_tensors(b);
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i].size() != tb[i].size()) return false;
    for (std::size_t j = 0; j < ta[i].size(); ++j) {
      if (ta[i][j] != tb[i][j]) return false;
    }
  }
  return true;
}

}  // namespace testutil
