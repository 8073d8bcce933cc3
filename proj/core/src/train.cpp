#include "weseg/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "weseg/labeling.hpp"
#include "weseg/loss.hpp"
#include "weseg/threading.hpp"

namespace weseg {

namespace {

double clip_prob(double p) { return std::clamp(p, kProbEps, 1.0 - kProbEps); }

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

// Proxy targets for the tile-level methods; nullopt when the slide cannot
// train this method (supervised on a partially tumoral slide).
std::optional<ProxyTarget> method_targets(Method method, std::span<const double> probs,
                                          const SlideBag& bag, const TrainConfig& cfg) {
  switch (method) {
    case Method::WeSeg:
      return assign_weseg(probs, bag.percent, cfg.margins);
    case Method::AlphaBeta:
      return assign_alphabeta(probs, bag.binary_label(), cfg.alpha, cfg.beta);
    case Method::Supervised: {
      if (bag.percent != 0.0 && bag.percent != 100.0) return std::nullopt;
      ProxyTarget t;
      t.targets.assign(probs.size(), bag.percent == 100.0 ? 1 : 0);
      t.mask.assign(probs.size(), 1);
      return t;
    }
    case Method::AttentionMil:
      throw std::logic_error("method_targets: attention is bag-level");
  }
  return std::nullopt;
}

double bag_bce(double prob, int label, double& dprob) {
  const double p = clip_prob(prob);
  const double y = static_cast<double>(label);
  dprob = (p - y) / (p * (1.0 - p));
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

// Loss of one full bag under the method, without gradients.
std::optional<double> full_bag_loss(const ModelParams& params, const SlideBag& bag,
                                    const TrainConfig& cfg) {
  if (cfg.method == Method::AttentionMil) {
    const Matrix emb = trunk_forward(params, bag.features);
    const BagResult r = attention_pool(params, emb);
    double unused = 0.0;
    return bag_bce(r.bag_prob, bag.binary_label(), unused);
  }
  const std::vector<double> probs = mlp_forward(params, bag.features);
  const auto target = method_targets(cfg.method, probs, bag, cfg);
  if (!target) return std::nullopt;
  return masked_bce(probs, *target).loss;
}

}  // namespace

std::string_view method_name(Method m) {
  switch (m) {
    case Method::WeSeg: return "weseg";
    case Method::AlphaBeta: return "alphabeta";
    case Method::AttentionMil: return "attention_mil";
    case Method::Supervised: return "supervised";
  }
  return "weseg";
}

Method method_from_name(std::string_view name) {
  if (name == "weseg") return Method::WeSeg;
  if (name == "alphabeta") return Method::AlphaBeta;
  if (name == "attention_mil") return Method::AttentionMil;
  if (name == "supervised") return Method::Supervised;
  throw std::invalid_argument("unknown method: " + std::string(name));
}

void TrainConfig::validate() const {
  if (slides_per_batch == 0) throw std::invalid_argument("slides_per_batch must be positive");
  if (tiles_per_slide == 0) throw std::invalid_argument("tiles_per_slide must be positive");
  if (max_epochs == 0) throw std::invalid_argument("max_epochs must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr must be finite and >= 0");
  margins.validate();
  if (alpha < 0.0 || beta < 0.0 || alpha + beta > 100.0) {
    throw std::invalid_argument("need alpha, beta >= 0 and alpha + beta <= 100");
  }
}

BatchGrads batch_gradients(std::span<const SlideBag* const> batch,
                           const ModelParams& params, const TrainConfig& cfg,
                           Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("batch_gradients: empty batch");

  // Sample every slide's tiles first so the rng stream does not depend on
  // the method or on per-slide eligibility.
  std::vector<Matrix> sampled;
  sampled.reserve(batch.size());
  for (const SlideBag* bag : batch) {
    const std::size_t n = bag->tile_count();
    const std::vector<std::size_t> idx =
        n >= cfg.tiles_per_slide ? rng.sample_without_replacement(n, cfg.tiles_per_slide)
                                 : rng.sample_with_replacement(n, cfg.tiles_per_slide);
    sampled.push_back(gather_rows(bag->features, idx));
  }

  // Eligibility pass fixes the loss normalization before any gradient flows.
  std::vector<std::uint8_t> eligible(batch.size(), 1);
  std::size_t contributing = 0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    if (cfg.method == Method::Supervised && batch[s]->percent != 0.0 &&
        batch[s]->percent != 100.0) {
      eligible[s] = 0;
      continue;
    }
    ++contributing;
  }

  BatchGrads out;
  out.grads = zeros_like(params);
  out.contributing = contributing;
  if (contributing == 0) return out;
  const double scale = 1.0 / static_cast<double>(contributing);

  double loss_sum = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    if (!eligible[s]) continue;
    const SlideBag& bag = *batch[s];
    const Matrix& tiles = sampled[s];
    if (cfg.method == Method::AttentionMil) {
      ForwardCache fc;
      const Matrix emb = trunk_forward(params, tiles, &fc);
      AttentionCache ac;
      const BagResult r = attention_pool(params, emb, &ac);
      double dprob = 0.0;
      loss_sum += bag_bce(r.bag_prob, bag.binary_label(), dprob);
      const Matrix demb = attention_backward(params, ac, dprob * scale, out.grads);
      layers_backward(params, fc, demb, out.grads);
    } else {
      ForwardCache fc;
      const std::vector<double> probs = mlp_forward(params, tiles, &fc);
      const auto target = method_targets(cfg.method, probs, bag, cfg);
      const LossGrad lg = masked_bce(probs, *target);
      loss_sum += lg.loss;
      std::vector<double> up(lg.grad.size());
      for (std::size_t i = 0; i < up.size(); ++i) up[i] = lg.grad[i] * scale;
      mlp_backward(params, fc, up, out.grads);
    }
  }
  out.loss = loss_sum * scale;
  return out;
}

StepResult train_step(std::span<const SlideBag* const> batch, ModelParams& params,
                      AdamState& state, const TrainConfig& cfg, Rng& rng) {
  const BatchGrads bg = batch_gradients(batch, params, cfg, rng);
  StepResult r;
  r.loss = bg.loss;
  if (bg.contributing == 0) return r;
  r.applied = adam_step(params, bg.grads, state, cfg.lr);
  return r;
}

double validation_loss(const ModelParams& params, const Cohort& cohort,
                       const TrainConfig& cfg) {
  if (cohort.slides.empty()) throw std::invalid_argument("validation_loss: empty cohort");
  std::vector<std::optional<double>> losses(cohort.slides.size());
  parallel_for(0, cohort.slides.size(), [&](std::size_t i) {
    losses[i] = full_bag_loss(params, cohort.slides[i], cfg);
  });
  double sum = 0.0;
  std::size_t used = 0;
  for (const auto& l : losses) {
    if (!l) continue;
    sum += *l;
    ++used;
  }
  if (used == 0) {
    throw std::runtime_error("validation_loss: no slide in cohort '" + cohort.name +
                             "' is usable by method " + std::string(method_name(cfg.method)));
  }
  return sum / static_cast<double>(used);
}

TrainResult run_training(const Cohort& train, const Cohort& val,
                         const TrainConfig& cfg, const ImprovementCallback& on_improve) {
  cfg.validate();
  if (train.slides.empty() || val.slides.empty()) {
    throw std::invalid_argument("run_training: train and val cohorts must be non-empty");
  }
  {
    std::unordered_set<std::string> train_ids;
    for (const SlideBag& b : train.slides) train_ids.insert(b.id);
    for (const SlideBag& b : val.slides) {
      if (train_ids.count(b.id)) {
        throw std::invalid_argument("run_training: slide " + b.id +
                                    " appears in both train and val");
      }
    }
  }

  TrainResult result;
  result.standardizer = fit_standardizer(train);

  Cohort train_std = train;
  for (SlideBag& b : train_std.slides) result.standardizer.apply(b.features);
  Cohort val_std = val;
  for (SlideBag& b : val_std.slides) result.standardizer.apply(b.features);

  Rng rng(cfg.seed);
  ModelParams params = cfg.method == Method::AttentionMil
                           ? make_attention_mil(train.slides.front().dim(), rng)
                           : make_mlp(train.slides.front().dim(), rng);
  AdamState state = make_adam_state(params);

  std::vector<std::size_t> order(train_std.slides.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::size_t stale_epochs = 0;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t steps = 0;
    for (std::size_t at = 0; at < order.size(); at += cfg.slides_per_batch) {
      const std::size_t hi = std::min(order.size(), at + cfg.slides_per_batch);
      std::vector<const SlideBag*> batch;
      batch.reserve(hi - at);
      for (std::size_t k = at; k < hi; ++k) batch.push_back(&train_std.slides[order[k]]);
      const StepResult sr = train_step(batch, params, state, cfg, rng);
      if (sr.applied) {
        loss_sum += sr.loss;
        ++steps;
      }
    }
    const double train_loss = steps > 0 ? loss_sum / static_cast<double>(steps) : 0.0;
    const double val_loss = validation_loss(params, val_std, cfg);
    const auto t1 = std::chrono::steady_clock::now();
    const double wall_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    result.history.push_back({epoch, train_loss, val_loss, cfg.lr, wall_ms});
    result.epochs_run = epoch;

    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) {
      throw std::runtime_error(
          "run_training: non-finite loss at epoch " + std::to_string(epoch) +
          " (train " + std::to_string(train_loss) + ", val " + std::to_string(val_loss) +
          ", lr " + std::to_string(cfg.lr) + ", method " +
          std::string(method_name(cfg.method)) + ")");
    }

    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.best_params = params;
      stale_epochs = 0;
      if (on_improve) on_improve(params, result.standardizer, epoch, val_loss);
    } else {
      ++stale_epochs;
      if (stale_epochs > cfg.patience) break;
    }
  }
  return result;
}

SweepResult lr_random_search(const Cohort& train, const Cohort& val,
                             const TrainConfig& base, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("lr_random_search: trials must be >= 1");
  Rng rng(base.seed);
  std::vector<double> lrs(trials);
  for (double& lr : lrs) lr = std::pow(10.0, rng.uniform(-6.0, -3.0));

  SweepResult sweep;
  sweep.best_trial = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    TrainConfig cfg = base;
    cfg.lr = lrs[t];
    TrainResult r = run_training(train, val, cfg);
    sweep.trials.push_back({t, lrs[t], r.best_val_loss, r.best_epoch, r.epochs_run});
    if (r.best_val_loss < best_val) {
      best_val = r.best_val_loss;
      sweep.best_trial = t;
      sweep.best_lr = lrs[t];
      sweep.best = std::move(r);
    }
  }
  return sweep;
}

std::vector<std::vector<double>> score_cohort(const ModelParams& params,
                                              const Standardizer& st, Method method,
                                              const Cohort& cohort) {
  std::vector<std::vector<double>> scores(cohort.slides.size());
  parallel_for(0, cohort.slides.size(), [&](std::size_t i) {
    const Matrix features = st.applied(cohort.slides[i].features);
    if (method == Method::AttentionMil) {
      const Matrix emb = trunk_forward(params, features);
      const BagResult r = attention_pool(params, emb);
      scores[i] = attention_scores(r.weights, r.bag_prob);
    } else {
      scores[i] = mlp_forward(params, features);
    }
  });
  return scores;
}

Cohort refine_annotations(const ModelParams& params, const Standardizer& st,
                          const Cohort& cohort) {
  if (params.attention) {
    throw std::invalid_argument(
        "refine_annotations: needs a tile-probability model, not an attention head");
  }
  Cohort refined = cohort;
  parallel_for(0, refined.slides.size(), [&](std::size_t i) {
    SlideBag& bag = refined.slides[i];
    if (bag.binary_label() == 0) {
      bag.percent = 0.0;
      return;
    }
    const std::vector<double> probs = mlp_forward(params, st.applied(bag.features));
    std::size_t above = 0;
    for (double p : probs) above += p >= 0.5 ? 1 : 0;
    bag.percent = 100.0 * static_cast<double>(above) / static_cast<double>(probs.size());
  });
  return refined;
}

}  // namespace weseg
