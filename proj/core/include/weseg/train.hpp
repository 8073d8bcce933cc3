#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "weseg/adam.hpp"
#include "weseg/model.hpp"
#include "weseg/rng.hpp"
#include "weseg/standardize.hpp"
#include "weseg/types.hpp"

namespace weseg {

enum class Method { WeSeg, AlphaBeta, AttentionMil, Supervised };

std::string_view method_name(Method m);
Method method_from_name(std::string_view name);

struct TrainConfig {
  Method method = Method::WeSeg;
  std::size_t slides_per_batch = 8;
  std::size_t tiles_per_slide = 30;
  std::size_t patience = 50;
  std::size_t max_epochs = 400;
  double lr = 3e-4;
  Margins margins;        // weseg only
  double alpha = 50.0;    // alphabeta only
  double beta = 0.0;
  std::uint64_t seed = 1;

  void validate() const;
};

// Per-slide gradients of one batch, before the optimizer step. Slides are
// processed in batch order; tile sampling consumes the rng identically for
// every method so matched runs stay comparable. Supervised slides whose
// annotation is not exactly 0 or 100 are sampled but contribute nothing.
struct BatchGrads {
  ModelParams grads;
  double loss = 0.0;           // mean of per-slide losses
  std::size_t contributing = 0;
};

BatchGrads batch_gradients(std::span<const SlideBag* const> batch,
                           const ModelParams& params, const TrainConfig& cfg,
                           Rng& rng);

struct StepResult {
  double loss = 0.0;
  bool applied = false;  // false when no slide contributed or the step was rejected
};

// batch_gradients followed by one Adam step. Features must already be
// standardized.
StepResult train_step(std::span<const SlideBag* const> batch, ModelParams& params,
                      AdamState& state, const TrainConfig& cfg, Rng& rng);

// Method-specific loss over full bags (no tile sampling): the early-stopping
// criterion. Throws when the method can use no slide of the cohort.
double validation_loss(const ModelParams& params, const Cohort& cohort,
                       const TrainConfig& cfg);

struct EpochRow {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
  double wall_ms = 0.0;
};

struct TrainResult {
  ModelParams best_params;
  Standardizer standardizer;
  std::vector<EpochRow> history;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

// Called on every validation improvement (checkpoint hook).
using ImprovementCallback =
    std::function<void(const ModelParams& params, const Standardizer& st,
                       std::size_t epoch, double val_loss)>;

// Fits the standardizer on the training cohort, then runs shuffled
// fixed-size batches until `patience` epochs pass without a validation
// improvement or max_epochs is reached. One epoch visits every training
// slide exactly once. Returns the parameters of the best epoch.
TrainResult run_training(const Cohort& train, const Cohort& val,
                         const TrainConfig& cfg,
                         const ImprovementCallback& on_improve = {});

struct SweepTrial {
  std::size_t index = 0;
  double lr = 0.0;
  double best_val_loss = 0.0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

struct SweepResult {
  double best_lr = 0.0;
  std::size_t best_trial = 0;
  std::vector<SweepTrial> trials;
  TrainResult best;
};

// Learning rates 10^u with u uniform on [-6, -3), all drawn from the base
// seed; ties resolve to the earlier trial.
SweepResult lr_random_search(const Cohort& train, const Cohort& val,
                             const TrainConfig& base, std::size_t trials);

// Per-tile probabilities (or attention scores for AttentionMil) for every
// slide, applying the standardizer first. Parallel over slides.
std::vector<std::vector<double>> score_cohort(const ModelParams& params,
                                              const Standardizer& st, Method method,
                                              const Cohort& cohort);

// Transductive re-annotation: percent becomes 100 x the fraction of tiles
// with predicted probability >= 0.5; binary-label-0 slides stay at 0.
// Tile-probability models only (not AttentionMil).
Cohort refine_annotations(const ModelParams& params, const Standardizer& st,
                          const Cohort& cohort);

}  // namespace weseg
