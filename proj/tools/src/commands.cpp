#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "weseg/checkpoint.hpp"
#include "weseg/manifest.hpp"
#include "weseg/metrics.hpp"
#include "weseg/pnm.hpp"
#include "weseg/svg.hpp"
#include "weseg/synth.hpp"
#include "weseg/threading.hpp"
#include "weseg/tiler.hpp"
#include "weseg/train.hpp"

namespace weseg::cli {

namespace fs = std::filesystem;

namespace {

// Keeps noise and raster streams disjoint from the per-slide feature streams
// (which use seed ^ slide_index).
constexpr std::uint64_t kNoiseSalt = 0x6E6F697365ULL;
constexpr std::uint64_t kRasterSalt = 0x72617374ULL;

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string f6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

std::string opt_f6(const std::optional<double>& x) {
  return x ? f6(*x) : std::string("undefined");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

void prepare_out_dir(const RunConfig& cfg, const fs::path& out) {
  fs::create_directories(out);
  set_max_threads(cfg.threads);
  write_run_config(out / "config.json", cfg);
}

SynthSpec spec_from_config(const RunConfig& cfg) {
  SynthSpec spec;
  spec.dim = cfg.data.dim;
  spec.mu0.assign(cfg.data.dim, 0.0);
  spec.mu1.assign(cfg.data.dim, cfg.data.d_prime * cfg.data.sigma /
                                    std::sqrt(static_cast<double>(cfg.data.dim)));
  spec.sigma = cfg.data.sigma;
  spec.min_tiles = cfg.data.min_tiles;
  spec.max_tiles = cfg.data.max_tiles;
  spec.normal_weight = cfg.data.normal_weight;
  spec.seed = cfg.seed;
  spec.validate();
  return spec;
}

TrainConfig train_config(const RunConfig& cfg) {
  TrainConfig t = cfg.train;
  t.seed = cfg.seed;
  t.validate();
  return t;
}

void write_history_csv(const fs::path& path, const std::vector<EpochRow>& history) {
  auto os = open_out(path);
  os << "epoch,train_loss,val_loss,lr,wall_ms\n";
  for (const EpochRow& r : history) {
    char wall[32];
    std::snprintf(wall, sizeof(wall), "%.3f", r.wall_ms);
    os << r.epoch << "," << g17(r.train_loss) << "," << g17(r.val_loss) << ","
       << g17(r.lr) << "," << wall << "\n";
  }
}

Method scoring_method(const ModelParams& params) {
  return params.attention ? Method::AttentionMil : Method::WeSeg;
}

Checkpoint load_trained_checkpoint(const fs::path& path) {
  Checkpoint ckpt = load_checkpoint(path);
  if (!ckpt.standardizer) {
    throw std::runtime_error(path.string() +
                             ": checkpoint has no standardizer; it was not "
                             "produced by a training run");
  }
  return ckpt;
}

void write_eval_outputs(const fs::path& out, const CohortReport& report,
                        std::span<const double> pooled_scores,
                        std::span<const std::uint8_t> pooled_labels,
                        const AnnotationStats& stats) {
  {
    auto os = open_out(out / "eval.csv");
    os << "method,cohort,pooled_auc,mean_slide_auc,slides,skipped_single_class\n";
    os << report.method << "," << report.cohort << "," << opt_f6(report.pooled_auc)
       << "," << opt_f6(report.mean_slide_auc) << "," << report.per_slide.size() << ","
       << report.skipped_single_class << "\n";
  }
  {
    auto os = open_out(out / "per_slide.csv");
    os << "slide,auc\n";
    for (const SlideAuc& s : report.per_slide) {
      os << s.id << "," << opt_f6(s.value) << "\n";
    }
  }
  const auto roc = roc_points(pooled_scores, pooled_labels);
  {
    auto os = open_out(out / "roc.csv");
    os << "fpr,tpr\n";
    for (const RocPoint& p : roc) os << f6(p.fpr) << "," << f6(p.tpr) << "\n";
  }
  write_roc_svg(out / "roc.svg",
                report.method + " on " + report.cohort +
                    " (AUC " + opt_f6(report.pooled_auc) + ")",
                {{report.method, roc}});
  {
    auto os = open_out(out / "annotation_stats.csv");
    os << "total,nonzero,multiple_of_5,multiple_of_20,incidence_5,incidence_20\n";
    os << stats.total << "," << stats.nonzero << "," << stats.multiple_of_5 << ","
       << stats.multiple_of_20 << "," << f6(stats.incidence_5()) << ","
       << f6(stats.incidence_20()) << "\n";
  }
  {
    auto os = open_out(out / "annotation_hist.csv");
    os << "percent,count\n";
    for (std::size_t p = 0; p <= 100; ++p) {
      if (stats.histogram[p] > 0) os << p << "," << stats.histogram[p] << "\n";
    }
  }
}

}  // namespace

int cmd_generate(const RunConfig& cfg, const fs::path& out) {
  if (cfg.data.count == 0) throw std::runtime_error("generate: data.count is zero");
  const auto val_n = static_cast<std::size_t>(
      std::llround(cfg.data.split[1] * static_cast<double>(cfg.data.count)));
  const auto test_n = static_cast<std::size_t>(
      std::llround(cfg.data.split[2] * static_cast<double>(cfg.data.count)));
  if (val_n + test_n >= cfg.data.count) {
    throw std::runtime_error("generate: split leaves no training slides");
  }
  const std::size_t train_n = cfg.data.count - val_n - test_n;
  if (val_n == 0 || test_n == 0) {
    throw std::runtime_error("generate: split leaves an empty cohort");
  }
  prepare_out_dir(cfg, out);
  const SynthSpec spec = spec_from_config(cfg);

  const struct {
    const char* name;
    std::size_t count;
    std::size_t first;
  } cohorts[] = {{"train", train_n, 0},
                 {"val", val_n, train_n},
                 {"test", test_n, train_n + val_n}};
  for (const auto& c : cohorts) {
    Cohort cohort;
    cohort.name = c.name;
    cohort.slides = gen_feature_bags(spec, c.count, c.first);
    std::vector<double> true_percents;
    true_percents.reserve(c.count);
    for (std::size_t i = 0; i < cohort.slides.size(); ++i) {
      SlideBag& bag = cohort.slides[i];
      true_percents.push_back(bag.percent);
      if (cfg.data.noise) {
        bag.percent = perturb_annotation(
            bag.percent, spec.seed ^ (c.first + i) ^ kNoiseSalt);
      }
    }
    store_cohort(out, cohort, true_percents);
    std::cout << "generate: " << c.name << " " << c.count << " slides, "
              << cohort.tile_total() << " tiles\n";
  }

  if (cfg.data.rasters > 0) {
    fs::create_directories(out / "rasters");
    Rng rr(cfg.seed ^ kRasterSalt);
    CohortManifest rm;
    rm.name = "rasters";
    for (std::size_t i = 0; i < cfg.data.rasters; ++i) {
      double percent = 0.0;
      if (rr.next_double() >= cfg.data.normal_weight) {
        percent = 100.0 * rr.next_double_open_zero();
      }
      SynthSpec si = spec;
      si.seed = cfg.seed ^ (kRasterSalt + i + 1);
      const RasterSlide slide =
          gen_raster_slide(si, cfg.data.raster_width, cfg.data.raster_height, percent);
      ManifestEntry e;
      e.id = "raster_" + std::to_string(i);
      e.percent = slide.achieved_percent;
      e.true_percent = slide.achieved_percent;
      e.label = slide.achieved_percent > 0.0 ? 1 : 0;
      e.image_path = "rasters/" + e.id + ".ppm";
      e.truth_path = "rasters/" + e.id + "_truth.pgm";
      write_ppm(out / e.image_path, slide.image);
      write_pgm(out / e.truth_path, slide.truth);
      rm.entries.push_back(std::move(e));
    }
    write_manifest(out / "rasters.manifest", rm);
    std::cout << "generate: " << cfg.data.rasters << " raster slides\n";
  }
  return 0;
}

int cmd_train(const RunConfig& cfg, const fs::path& data, const fs::path& out) {
  prepare_out_dir(cfg, out);
  const Cohort train = load_cohort(data / "train.manifest");
  const Cohort val = load_cohort(data / "val.manifest");
  const TrainConfig tc = train_config(cfg);

  const fs::path ckpt_path = out / "checkpoint.txt";
  const TrainResult result = run_training(
      train, val, tc,
      [&](const ModelParams& params, const Standardizer& st, std::size_t epoch,
          double val_loss) {
        save_checkpoint(ckpt_path, Checkpoint{params, st});
        std::cout << "epoch " << epoch << ": val_loss " << val_loss
                  << " (checkpoint updated)\n";
      });

  write_history_csv(out / "history.csv", result.history);
  {
    auto os = open_out(out / "summary.csv");
    os << "method,best_epoch,best_val_loss,epochs_run\n";
    os << method_name(tc.method) << "," << result.best_epoch << ","
       << g17(result.best_val_loss) << "," << result.epochs_run << "\n";
  }
  std::cout << "train: method " << method_name(tc.method) << ", best epoch "
            << result.best_epoch << ", best val loss " << result.best_val_loss
            << ", epochs run " << result.epochs_run << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg, const fs::path& data, const fs::path& out) {
  prepare_out_dir(cfg, out);
  const Cohort train = load_cohort(data / "train.manifest");
  const Cohort val = load_cohort(data / "val.manifest");
  const TrainConfig base = train_config(cfg);

  const SweepResult sweep = lr_random_search(train, val, base, cfg.trials);
  {
    auto os = open_out(out / "sweep.csv");
    os << "trial,lr,best_val_loss,best_epoch,epochs_run,winner\n";
    for (const SweepTrial& t : sweep.trials) {
      os << t.index << "," << g17(t.lr) << "," << g17(t.best_val_loss) << ","
         << t.best_epoch << "," << t.epochs_run << ","
         << (t.index == sweep.best_trial ? 1 : 0) << "\n";
    }
  }
  save_checkpoint(out / "checkpoint.txt",
                  Checkpoint{sweep.best.best_params, sweep.best.standardizer});
  write_history_csv(out / "history.csv", sweep.best.history);
  std::cout << "sweep: best lr " << sweep.best_lr << " (trial " << sweep.best_trial
            << ", val loss " << sweep.best.best_val_loss << ")\n";
  return 0;
}

int cmd_infer(const RunConfig& cfg, const fs::path& checkpoint,
              const std::optional<fs::path>& manifest,
              const std::optional<fs::path>& image, const fs::path& out) {
  if (!manifest == !image) {
    throw std::runtime_error("infer: pass exactly one of --manifest or --image");
  }
  prepare_out_dir(cfg, out);
  const Checkpoint ckpt = load_trained_checkpoint(checkpoint);
  const Method method = scoring_method(ckpt.params);

  if (manifest) {
    const Cohort cohort = load_cohort(*manifest);
    const auto scores = score_cohort(ckpt.params, *ckpt.standardizer, method, cohort);
    auto os = open_out(out / "scores.csv");
    os << "slide,tile,score\n";
    for (std::size_t s = 0; s < cohort.slides.size(); ++s) {
      for (std::size_t t = 0; t < scores[s].size(); ++t) {
        os << cohort.slides[s].id << "," << t << "," << g17(scores[s][t]) << "\n";
      }
    }
    std::cout << "infer: scored " << cohort.slides.size() << " slides\n";
    return 0;
  }

  const RgbImage img = read_ppm(*image);
  const TiledSlide tiled = tile_slide(img);
  std::vector<double> scores;
  if (tiled.features.rows > 0) {
    const Matrix features = ckpt.standardizer->applied(tiled.features);
    if (method == Method::AttentionMil) {
      const Matrix emb = trunk_forward(ckpt.params, features);
      const BagResult r = attention_pool(ckpt.params, emb);
      scores = attention_scores(r.weights, r.bag_prob);
    } else {
      scores = mlp_forward(ckpt.params, features);
    }
  }
  const SegmentationMap map = stitch_map(tiled.grid, tiled.background, scores);

  const std::string stem = image->stem().string();
  {
    auto os = open_out(out / (stem + "_scores.csv"));
    os << "tile,x,y,score\n";
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const TilePos& pos = tiled.grid.positions[tiled.tile_index[i]];
      os << tiled.tile_index[i] << "," << pos.x << "," << pos.y << ","
         << g17(scores[i]) << "\n";
    }
  }
  GrayImage map8(map.probabilities.width, map.probabilities.height);
  for (std::size_t i = 0; i < map8.pixels.size(); ++i) {
    map8.pixels[i] = static_cast<std::uint8_t>(
        std::lround(std::clamp(map.probabilities.values[i], 0.0, 1.0) * 255.0));
  }
  write_pgm(out / (stem + "_map.pgm"), map8);
  write_float_map(out / (stem + "_map.f64"), map.probabilities);
  write_pgm(out / (stem + "_bg.pgm"), map.background);
  std::cout << "infer: " << scores.size() << " tissue tiles of "
            << tiled.grid.tile_count() << " stitched into " << map.probabilities.width
            << "x" << map.probabilities.height << " map\n";
  return 0;
}

int cmd_refine(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& manifest,
               const fs::path& out) {
  prepare_out_dir(cfg, out);
  const Checkpoint ckpt = load_trained_checkpoint(checkpoint);
  const CohortManifest source = read_manifest(manifest);
  const Cohort cohort = load_cohort(manifest);
  const Cohort refined = refine_annotations(ckpt.params, *ckpt.standardizer, cohort);

  CohortManifest rm;
  rm.name = source.name;
  const fs::path base = manifest.parent_path();
  auto relocate = [&](const std::string& rel) -> std::string {
    if (rel.empty()) return rel;
    return fs::relative(base / rel, out).lexically_normal().generic_string();
  };
  {
    auto os = open_out(out / "refine_summary.csv");
    os << "slide,old_percent,new_percent\n";
    for (std::size_t i = 0; i < source.entries.size(); ++i) {
      ManifestEntry e = source.entries[i];
      os << e.id << "," << g17(e.percent) << "," << g17(refined.slides[i].percent)
         << "\n";
      e.percent = refined.slides[i].percent;
      e.features_path = relocate(e.features_path);
      e.truth_path = relocate(e.truth_path);
      e.image_path = relocate(e.image_path);
      rm.entries.push_back(std::move(e));
    }
  }
  write_manifest(out / (rm.name + ".manifest"), rm);
  std::cout << "refine: re-annotated " << rm.entries.size() << " slides\n";
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const fs::path& checkpoint, const fs::path& manifest,
                 const std::optional<fs::path>& maps, std::string method_label,
                 const fs::path& out) {
  prepare_out_dir(cfg, out);

  if (maps) {
    // Stored stitched maps vs pixel truth, background pixels discarded.
    const CohortManifest m = read_manifest(manifest);
    const fs::path base = manifest.parent_path();
    if (method_label.empty()) method_label = "maps";
    Cohort pixel_cohort;
    pixel_cohort.name = m.name;
    std::vector<std::vector<double>> scores;
    for (const ManifestEntry& e : m.entries) {
      if (e.truth_path.empty()) {
        throw std::runtime_error("evaluate: slide " + e.id + " has no truth mask");
      }
      const GrayImage truth = read_pgm(base / e.truth_path);
      const FloatMap map = read_float_map(*maps / (e.id + "_map.f64"));
      const GrayImage bg = read_pgm(*maps / (e.id + "_bg.pgm"));
      if (map.width != truth.width || map.height != truth.height ||
          bg.width != truth.width || bg.height != truth.height) {
        throw std::runtime_error("evaluate: size mismatch on slide " + e.id);
      }
      SlideBag bag;
      bag.id = e.id;
      bag.percent = e.percent;
      bag.slide_label = e.label;
      std::vector<double> s;
      std::vector<std::uint8_t> t;
      for (std::size_t i = 0; i < map.values.size(); ++i) {
        if (bg.pixels[i] != 0) continue;  // tissue pixels only
        s.push_back(map.values[i]);
        t.push_back(truth.pixels[i] > 127 ? 1 : 0);
      }
      if (s.empty()) {
        throw std::runtime_error("evaluate: slide " + e.id + " has no tissue pixels");
      }
      bag.features = Matrix(s.size(), 1);
      bag.truth = std::move(t);
      pixel_cohort.slides.push_back(std::move(bag));
      scores.push_back(std::move(s));
    }
    const CohortReport report = eval_cohort(method_label, pixel_cohort, scores);
    std::vector<double> pooled_s;
    std::vector<std::uint8_t> pooled_t;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      pooled_s.insert(pooled_s.end(), scores[i].begin(), scores[i].end());
      pooled_t.insert(pooled_t.end(), pixel_cohort.slides[i].truth->begin(),
                      pixel_cohort.slides[i].truth->end());
    }
    write_eval_outputs(out, report, pooled_s, pooled_t, annotation_stats(pixel_cohort));
    std::cout << "evaluate: " << method_label << " pooled pixel AUC "
              << opt_f6(report.pooled_auc) << "\n";
    return 0;
  }

  const Checkpoint ckpt = load_trained_checkpoint(checkpoint);
  const Method method = scoring_method(ckpt.params);
  if (method_label.empty()) method_label = std::string(method_name(method));
  const Cohort cohort = load_cohort(manifest);
  const auto scores = score_cohort(ckpt.params, *ckpt.standardizer, method, cohort);
  const CohortReport report = eval_cohort(method_label, cohort, scores);

  std::vector<double> pooled_s;
  std::vector<std::uint8_t> pooled_t;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    pooled_s.insert(pooled_s.end(), scores[i].begin(), scores[i].end());
    pooled_t.insert(pooled_t.end(), cohort.slides[i].truth->begin(),
                    cohort.slides[i].truth->end());
  }
  write_eval_outputs(out, report, pooled_s, pooled_t, annotation_stats(cohort));
  std::cout << "evaluate: " << method_label << " pooled AUC "
            << opt_f6(report.pooled_auc) << " over " << report.per_slide.size()
            << " slides\n";
  return 0;
}

int cmd_report(const RunConfig& cfg, const fs::path& results, const std::string& methods_csv,
               const std::string& reference, const fs::path& out) {
  prepare_out_dir(cfg, out);
  std::vector<std::string> methods;
  {
    std::stringstream ss(methods_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) methods.push_back(item);
    }
  }
  if (methods.empty()) throw std::runtime_error("report: no methods requested");

  struct Row {
    std::string method;
    bool present = false;
    std::string cohort;
    std::optional<double> pooled;
    std::string mean_slide;
    std::string slides, skipped;
  };
  std::vector<Row> rows;
  for (const std::string& m : methods) {
    Row row;
    row.method = m;
    const fs::path csv = results / m / "eval.csv";
    std::ifstream is(csv);
    if (is) {
      std::string header, line;
      if (std::getline(is, header) && std::getline(is, line)) {
        std::stringstream ls(line);
        std::string method_field, pooled;
        std::getline(ls, method_field, ',');
        std::getline(ls, row.cohort, ',');
        std::getline(ls, pooled, ',');
        std::getline(ls, row.mean_slide, ',');
        std::getline(ls, row.slides, ',');
        std::getline(ls, row.skipped, ',');
        if (pooled != "undefined" && !pooled.empty()) row.pooled = std::stod(pooled);
        row.present = true;
      }
    }
    rows.push_back(std::move(row));
  }

  std::optional<double> ref_auc;
  for (const Row& r : rows) {
    if (r.method == reference && r.pooled) ref_auc = r.pooled;
  }

  bool any_absent = false;
  {
    auto os = open_out(out / "comparison.csv");
    os << "method,cohort,pooled_auc,mean_slide_auc,slides,skipped_single_class,"
          "error_reduction_vs_" << reference << ",status\n";
    for (const Row& r : rows) {
      if (!r.present) {
        any_absent = true;
        os << r.method << ",,,,,,,absent\n";
        continue;
      }
      std::string red;
      if (ref_auc && r.pooled && *ref_auc < 1.0) {
        red = f6(error_reduction(*r.pooled, *ref_auc));
      }
      os << r.method << "," << r.cohort << "," << opt_f6(r.pooled) << ","
         << r.mean_slide << "," << r.slides << "," << r.skipped << "," << red
         << ",present\n";
    }
  }

  std::vector<RocSeries> series;
  for (const Row& r : rows) {
    if (!r.present) continue;
    std::ifstream is(results / r.method / "roc.csv");
    if (!is) continue;
    RocSeries s;
    s.label = r.method + (r.pooled ? " (" + f6(*r.pooled) + ")" : "");
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
      const auto comma = line.find(',');
      if (comma == std::string::npos) continue;
      s.points.push_back(
          {std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    }
    if (!s.points.empty()) series.push_back(std::move(s));
  }
  if (!series.empty()) {
    write_roc_svg(out / "comparison.svg", "method comparison", series);
  }

  for (const Row& r : rows) {
    std::cout << "report: " << r.method << " "
              << (r.present ? opt_f6(r.pooled) : std::string("ABSENT")) << "\n";
  }
  if (any_absent) {
    std::cerr << "report: at least one requested method has no results\n";
    return 1;
  }
  return 0;
}

}  // namespace weseg::cli
