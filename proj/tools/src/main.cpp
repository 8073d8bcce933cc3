#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "run_config.hpp"

namespace {

namespace fs = std::filesystem;
using weseg::cli::Overrides;
using weseg::cli::RunConfig;

struct CommonArgs {
  std::optional<fs::path> config;
  fs::path out;
  Overrides overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config, "JSON configuration file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out, "output directory")->required();
  cmd->add_option("--seed", args.overrides.seed, "root seed override");
  cmd->add_option("--threads", args.overrides.threads, "worker thread cap (0 = auto)");
}

RunConfig resolve(const CommonArgs& args) {
  RunConfig cfg = weseg::cli::load_run_config(args.config);
  weseg::cli::apply_overrides(cfg, args.overrides);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"weakly supervised tile segmentation experiments"};
  app.require_subcommand(1);

  CommonArgs gen_args;
  auto* gen = app.add_subcommand("generate", "write synthetic cohorts");
  add_common(gen, gen_args);

  CommonArgs train_args;
  fs::path train_data;
  auto* train = app.add_subcommand("train", "train one method on a generated dataset");
  add_common(train, train_args);
  train->add_option("--data", train_data, "directory holding the cohort manifests")
      ->required();
  train->add_option("--method", train_args.overrides.method,
                    "weseg | alphabeta | attention_mil | supervised");
  train->add_option("--lr", train_args.overrides.lr, "learning rate override");

  CommonArgs sweep_args;
  fs::path sweep_data;
  auto* sweep = app.add_subcommand("sweep", "log-uniform learning-rate random search");
  add_common(sweep, sweep_args);
  sweep->add_option("--data", sweep_data, "directory holding the cohort manifests")
      ->required();
  sweep->add_option("--method", sweep_args.overrides.method,
                    "weseg | alphabeta | attention_mil | supervised");
  sweep->add_option("--trials", sweep_args.overrides.trials, "number of trials");

  CommonArgs infer_args;
  fs::path infer_ckpt;
  std::optional<fs::path> infer_manifest, infer_image;
  auto* infer = app.add_subcommand("infer", "score a cohort or a raster image");
  add_common(infer, infer_args);
  infer->add_option("--checkpoint", infer_ckpt, "trained checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("--manifest", infer_manifest, "cohort manifest to score");
  infer->add_option("--image", infer_image, "raster image (binary PPM) to score");

  CommonArgs refine_args;
  fs::path refine_ckpt, refine_manifest;
  auto* refine = app.add_subcommand("refine", "replace annotations with predicted percents");
  add_common(refine, refine_args);
  refine->add_option("--checkpoint", refine_ckpt, "trained checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  refine->add_option("--manifest", refine_manifest, "cohort manifest to re-annotate")
      ->required()
      ->check(CLI::ExistingFile);

  CommonArgs eval_args;
  fs::path eval_ckpt, eval_manifest;
  std::optional<fs::path> eval_maps;
  std::string eval_label;
  auto* evaluate = app.add_subcommand("evaluate", "AUC report for one method");
  add_common(evaluate, eval_args);
  evaluate->add_option("--checkpoint", eval_ckpt, "trained checkpoint");
  evaluate->add_option("--manifest", eval_manifest, "cohort manifest with truth")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--maps", eval_maps,
                       "directory of stitched maps (evaluates stored maps instead "
                       "of the checkpoint)");
  evaluate->add_option("--method", eval_label, "method label for the report");

  CommonArgs report_args;
  fs::path report_results;
  std::string report_methods = "weseg,alphabeta,attention_mil,supervised";
  std::string report_reference = "supervised";
  auto* report = app.add_subcommand("report", "aggregate per-method evaluations");
  add_common(report, report_args);
  report->add_option("--results", report_results,
                     "directory with one evaluation subdirectory per method")
      ->required()
      ->check(CLI::ExistingDirectory);
  report->add_option("--methods", report_methods, "comma-separated method list");
  report->add_option("--reference", report_reference,
                     "method used as the error-reduction baseline");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return weseg::cli::cmd_generate(resolve(gen_args), gen_args.out);
    if (train->parsed()) {
      return weseg::cli::cmd_train(resolve(train_args), train_data, train_args.out);
    }
    if (sweep->parsed()) {
      return weseg::cli::cmd_sweep(resolve(sweep_args), sweep_data, sweep_args.out);
    }
    if (infer->parsed()) {
      return weseg::cli::cmd_infer(resolve(infer_args), infer_ckpt, infer_manifest,
                                   infer_image, infer_args.out);
    }
    if (refine->parsed()) {
      return weseg::cli::cmd_refine(resolve(refine_args), refine_ckpt, refine_manifest,
                                    refine_args.out);
    }
    if (evaluate->parsed()) {
      if (!eval_maps && eval_ckpt.empty()) {
        throw std::runtime_error("evaluate: pass --checkpoint or --maps");
      }
      return weseg::cli::cmd_evaluate(resolve(eval_args), eval_ckpt, eval_manifest,
                                      eval_maps, eval_label, eval_args.out);
    }
    if (report->parsed()) {
      return weseg::cli::cmd_report(resolve(report_args), report_results, report_methods,
                                    report_reference, report_args.out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
