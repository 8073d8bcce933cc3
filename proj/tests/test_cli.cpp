#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <doctest.h>

#include "support.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = WESEG_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  if (status < 0) return -1;
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), {});
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    files[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return files;
}

std::size_t line_count(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("generate is byte-deterministic and splits 70/10/20") {
  testutil::TempDir dir("cli_gen");
  write(dir.path / "cfg.json",
        R"({"seed": 5, "data": {"count": 100, "rasters": 1,
            "raster_width": 600, "raster_height": 600}})");

  const auto out1 = dir.path / "d1";
  const auto out2 = dir.path / "d2";
  REQUIRE(run("generate --config " + (dir.path / "cfg.json").string() + " --out " +
              out1.string()) == 0);
  REQUIRE(run("generate --config " + (dir.path / "cfg.json").string() + " --out " +
              out2.string()) == 0);

  const auto t1 = tree_bytes(out1);
  const auto t2 = tree_bytes(out2);
  REQUIRE(!t1.empty());
  REQUIRE(t1 == t2);

  // 3 header lines + one line per slide + "end"
  CHECK(line_count(slurp(out1 / "train.manifest")) == 4 + 70);
  CHECK(line_count(slurp(out1 / "val.manifest")) == 4 + 10);
  CHECK(line_count(slurp(out1 / "test.manifest")) == 4 + 20);
  CHECK(fs::exists(out1 / "rasters" / "raster_0.ppm"));
  CHECK(fs::exists(out1 / "config.json"));
}

TEST_CASE("generate rejects zero slides and unknown config keys") {
  testutil::TempDir dir("cli_bad");
  write(dir.path / "zero.json", R"({"data": {"count": 0}})");
  CHECK(run("generate --config " + (dir.path / "zero.json").string() + " --out " +
            (dir.path / "z").string()) != 0);

  write(dir.path / "typo.json", R"({"data": {"countt": 10}})");
  CHECK(run("generate --config " + (dir.path / "typo.json").string() + " --out " +
            (dir.path / "t").string()) != 0);

  write(dir.path / "extra.json", R"({"dato": {}})");
  CHECK(run("generate --config " + (dir.path / "extra.json").string() + " --out " +
            (dir.path / "e").string()) != 0);
}

TEST_CASE("seed precedence: flag beats env beats file") {
  testutil::TempDir dir("cli_seed");
  write(dir.path / "cfg.json", R"({"seed": 1, "data": {"count": 10}})");
  const std::string cfg = (dir.path / "cfg.json").string();

  REQUIRE(run("generate --config " + cfg + " --out " + (dir.path / "a").string()) == 0);
  CHECK(slurp(dir.path / "a" / "config.json").find("\"seed\": 1") != std::string::npos);

  const std::string env_cmd = "WESEG_SEED=2 " + kCli + " generate --config " + cfg +
                              " --out " + (dir.path / "b").string() + " >/dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(env_cmd.c_str())) == 0);
  CHECK(slurp(dir.path / "b" / "config.json").find("\"seed\": 2") != std::string::npos);

  const std::string both_cmd = "WESEG_SEED=2 " + kCli + " generate --config " + cfg +
                               " --seed 3 --out " + (dir.path / "c").string() +
                               " >/dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(both_cmd.c_str())) == 0);
  CHECK(slurp(dir.path / "c" / "config.json").find("\"seed\": 3") != std::string::npos);
}

TEST_CASE("full pipeline on 60 slides finishes within a minute") {
  const auto t0 = std::chrono::steady_clock::now();
  testutil::TempDir dir("cli_pipe");
  write(dir.path / "cfg.json",
        R"({"seed": 9, "data": {"count": 60, "rasters": 1, "raster_width": 640,
            "raster_height": 640},
            "train": {"max_epochs": 25, "patience": 8}})");
  const std::string cfg = " --config " + (dir.path / "cfg.json").string();
  const auto data = dir.path / "data";

  REQUIRE(run("generate" + cfg + " --out " + data.string()) == 0);

  const auto rundir = dir.path / "run";
  REQUIRE(run("train" + cfg + " --data " + data.string() + " --out " +
              rundir.string()) == 0);
  REQUIRE(fs::exists(rundir / "checkpoint.txt"));
  REQUIRE(fs::exists(rundir / "history.csv"));
  const auto hist = slurp(rundir / "history.csv");
  CHECK(hist.rfind("epoch,train_loss,val_loss,lr,wall_ms", 0) == 0);

  // Scoring a training manifest exercises the in-loop inference path.
  const auto scores = dir.path / "scores";
  REQUIRE(run("infer" + cfg + " --checkpoint " + (rundir / "checkpoint.txt").string() +
              " --manifest " + (data / "train.manifest").string() + " --out " +
              scores.string()) == 0);
  CHECK(fs::exists(scores / "scores.csv"));

  // Raster image inference produces stitched maps.
  const auto maps = dir.path / "maps";
  REQUIRE(run("infer" + cfg + " --checkpoint " + (rundir / "checkpoint.txt").string() +
              " --image " + (data / "rasters" / "raster_0.ppm").string() + " --out " +
              maps.string()) == 0);
  CHECK(fs::exists(maps / "raster_0_map.pgm"));
  CHECK(fs::exists(maps / "raster_0_map.f64"));
  CHECK(fs::exists(maps / "raster_0_bg.pgm"));

  const auto eval = dir.path / "results" / "weseg";
  REQUIRE(run("evaluate" + cfg + " --checkpoint " +
              (rundir / "checkpoint.txt").string() + " --manifest " +
              (data / "test.manifest").string() + " --method weseg --out " +
              eval.string()) == 0);
  const auto eval_csv = slurp(eval / "eval.csv");
  CHECK(eval_csv.find("weseg,test,") != std::string::npos);
  CHECK(fs::exists(eval / "roc.svg"));
  CHECK(fs::exists(eval / "per_slide.csv"));

  const auto refined = dir.path / "refined";
  REQUIRE(run("refine" + cfg + " --checkpoint " + (rundir / "checkpoint.txt").string() +
              " --manifest " + (data / "train.manifest").string() + " --out " +
              refined.string()) == 0);
  REQUIRE(fs::exists(refined / "train.manifest"));
  CHECK(fs::exists(refined / "refine_summary.csv"));

  const auto rerun = dir.path / "rerun";
  REQUIRE(run("train" + cfg + " --data " + refined.string() + " --out " +
              rerun.string()) != 0);  // refined dir lacks val.manifest
  REQUIRE(run("train" + cfg + " --data " + data.string() + " --out " +
              rerun.string()) == 0);

  const auto report = dir.path / "report";
  REQUIRE(run("report --results " + (dir.path / "results").string() +
              " --methods weseg --reference weseg --out " + report.string()) == 0);
  const auto comparison = slurp(report / "comparison.csv");
  CHECK(comparison.find("weseg") != std::string::npos);

  // A requested method without results marks its row absent and fails.
  CHECK(run("report --results " + (dir.path / "results").string() +
            " --methods weseg,alphabeta --reference weseg --out " +
            (dir.path / "report2").string()) != 0);
  CHECK(slurp(dir.path / "report2" / "comparison.csv").find("absent") !=
        std::string::npos);

  const auto elapsed = std::chrono::duration_cast<std::chrono::seconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
  CHECK(elapsed < 60);
}

TEST_CASE("evaluate can score stored maps against raster truth") {
  testutil::TempDir dir("cli_maps");
  write(dir.path / "cfg.json",
        R"({"seed": 12, "data": {"count": 24, "rasters": 2, "raster_width": 768,
            "raster_height": 768},
            "train": {"max_epochs": 6, "patience": 3}})");
  const std::string cfg = " --config " + (dir.path / "cfg.json").string();
  const auto data = dir.path / "data";
  REQUIRE(run("generate" + cfg + " --out " + data.string()) == 0);
  const auto rundir = dir.path / "run";
  REQUIRE(run("train" + cfg + " --data " + data.string() + " --out " +
              rundir.string()) == 0);

  const auto maps = dir.path / "maps";
  for (int i = 0; i < 2; ++i) {
    REQUIRE(run("infer" + cfg + " --checkpoint " +
                (rundir / "checkpoint.txt").string() + " --image " +
                (data / "rasters" / ("raster_" + std::to_string(i) + ".ppm")).string() +
                " --out " + maps.string()) == 0);
  }
  const auto eval = dir.path / "eval";
  REQUIRE(run("evaluate" + cfg + " --manifest " +
              (data / "rasters.manifest").string() + " --maps " + maps.string() +
              " --method weseg --out " + eval.string()) == 0);
  const auto eval_csv = slurp(eval / "eval.csv");
  CHECK(eval_csv.find("weseg,rasters,") != std::string::npos);
}

TEST_CASE("every run directory records its configuration") {
  testutil::TempDir dir("cli_cfgcopy");
  write(dir.path / "cfg.json", R"({"seed": 4, "data": {"count": 8},
        "train": {"max_epochs": 2, "patience": 1}})");
  const std::string cfg = " --config " + (dir.path / "cfg.json").string();
  REQUIRE(run("generate" + cfg + " --out " + (dir.path / "d").string()) == 0);
  REQUIRE(run("train" + cfg + " --data " + (dir.path / "d").string() + " --out " +
              (dir.path / "r").string()) == 0);
  for (const char* sub : {"d", "r"}) {
    const auto text = slurp(dir.path / sub / "config.json");
    CHECK(text.find("\"seed\": 4") != std::string::npos);
    CHECK(text.find("\"method\"") != std::string::npos);
  }
}

}  // TEST_SUITE
