#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "weseg/labeling.hpp"
#include "weseg/metrics.hpp"
#include "weseg/model.hpp"
#include "weseg/rng.hpp"
#include "weseg/tiler.hpp"
#include "weseg/types.hpp"

namespace {

using namespace weseg;

std::vector<double> random_probs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> p(n);
  for (double& v : p) v = rng.next_double();
  return p;
}

Matrix random_features(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.data) v = rng.uniform(-1.5, 1.5);
  return m;
}

RgbImage random_tile(std::size_t size, std::uint64_t seed) {
  Rng rng(seed);
  RgbImage img(size, size);
  for (auto& px : img.pixels) px = static_cast<std::uint8_t>(rng.below(256));
  return img;
}

void bm_assign_weseg(benchmark::State& state) {
  const auto probs = random_probs(static_cast<std::size_t>(state.range(0)), 1);
  const Margins margins{0.1, 0.1, 5.0, 5.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(assign_weseg(probs, 37.0, margins));
  }
}
BENCHMARK(bm_assign_weseg)->Arg(128)->Arg(1024)->Arg(8192);

void bm_auc(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const auto scores = random_probs(n, 2);
  Rng rng(3);
  std::vector<std::uint8_t> labels(n);
  for (auto& l : labels) l = static_cast<std::uint8_t>(rng.below(2));
  labels[0] = 0;
  labels[1] = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(auc(scores, labels));
  }
}
BENCHMARK(bm_auc)->Arg(1024)->Arg(16384);

void bm_mlp_forward(benchmark::State& state) {
  Rng init(4);
  const auto params = make_mlp(kFeatureDim, init);
  const auto features =
      random_features(static_cast<std::size_t>(state.range(0)), kFeatureDim, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mlp_forward(params, features));
  }
}
BENCHMARK(bm_mlp_forward)->Arg(32)->Arg(256)->Arg(2048);

void bm_mlp_backward(benchmark::State& state) {
  Rng init(6);
  const auto params = make_mlp(kFeatureDim, init);
  const auto features =
      random_features(static_cast<std::size_t>(state.range(0)), kFeatureDim, 7);
  const auto upstream = random_probs(features.rows, 8);
  for (auto _ : state) {
    ForwardCache cache;
    mlp_forward(params, features, &cache);
    ModelParams grads = zeros_like(params);
    mlp_backward(params, cache, upstream, grads);
    benchmark::DoNotOptimize(grads);
  }
}
BENCHMARK(bm_mlp_backward)->Arg(32)->Arg(256);

void bm_attention_pool(benchmark::State& state) {
  Rng init(9);
  const auto params = make_attention_mil(kFeatureDim, init);
  const auto features =
      random_features(static_cast<std::size_t>(state.range(0)), kFeatureDim, 10);
  const Matrix embeddings = trunk_forward(params, features);
  for (auto _ : state) {
    benchmark::DoNotOptimize(attention_pool(params, embeddings));
  }
}
BENCHMARK(bm_attention_pool)->Arg(32)->Arg(256)->Arg(2048);

void bm_extract_features(benchmark::State& state) {
  const auto tile = random_tile(static_cast<std::size_t>(state.range(0)), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_features(tile));
  }
}
BENCHMARK(bm_extract_features)->Arg(128)->Arg(512);

void bm_stitch_map(benchmark::State& state) {
  const std::size_t side = static_cast<std::size_t>(state.range(0));
  const auto grid = tile_grid(side, side, 128, 32);
  const std::vector<std::uint8_t> background(grid.tile_count(), 0);
  const auto scores = random_probs(grid.tile_count(), 12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stitch_map(grid, background, scores));
  }
}
BENCHMARK(bm_stitch_map)->Arg(512)->Arg(2048);

}  // namespace

BENCHMARK_MAIN();
