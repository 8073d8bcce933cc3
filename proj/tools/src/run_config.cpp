#include "run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace weseg::cli {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) {
      throw std::runtime_error("config: unknown key '" + where + key + "'");
    }
  }
}

template <class T>
void get_to(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) obj.at(key).get_to(out);
}

void parse_margins(const json& obj, Margins& m) {
  reject_unknown(obj, {"r_low", "r_high", "a_low", "a_high"}, "train.margins.");
  get_to(obj, "r_low", m.r_low);
  get_to(obj, "r_high", m.r_high);
  get_to(obj, "a_low", m.a_low);
  get_to(obj, "a_high", m.a_high);
}

void parse_data(const json& obj, DataConfig& d) {
  reject_unknown(obj,
                 {"dim", "d_prime", "sigma", "min_tiles", "max_tiles", "normal_weight",
                  "count", "split", "noise", "rasters", "raster_width", "raster_height"},
                 "data.");
  get_to(obj, "dim", d.dim);
  get_to(obj, "d_prime", d.d_prime);
  get_to(obj, "sigma", d.sigma);
  get_to(obj, "min_tiles", d.min_tiles);
  get_to(obj, "max_tiles", d.max_tiles);
  get_to(obj, "normal_weight", d.normal_weight);
  get_to(obj, "count", d.count);
  if (obj.contains("split")) {
    const auto& s = obj.at("split");
    if (!s.is_array() || s.size() != 3) {
      throw std::runtime_error("config: data.split must be an array of 3 fractions");
    }
    for (std::size_t i = 0; i < 3; ++i) s.at(i).get_to(d.split[i]);
  }
  get_to(obj, "noise", d.noise);
  get_to(obj, "rasters", d.rasters);
  get_to(obj, "raster_width", d.raster_width);
  get_to(obj, "raster_height", d.raster_height);
}

void parse_train(const json& obj, TrainConfig& t) {
  reject_unknown(obj,
                 {"method", "lr", "slides_per_batch", "tiles_per_slide", "patience",
                  "max_epochs", "margins", "alpha", "beta"},
                 "train.");
  if (obj.contains("method")) t.method = method_from_name(obj.at("method").get<std::string>());
  get_to(obj, "lr", t.lr);
  get_to(obj, "slides_per_batch", t.slides_per_batch);
  get_to(obj, "tiles_per_slide", t.tiles_per_slide);
  get_to(obj, "patience", t.patience);
  get_to(obj, "max_epochs", t.max_epochs);
  if (obj.contains("margins")) parse_margins(obj.at("margins"), t.margins);
  get_to(obj, "alpha", t.alpha);
  get_to(obj, "beta", t.beta);
}

json to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["trials"] = cfg.trials;
  json d;
  d["dim"] = cfg.data.dim;
  d["d_prime"] = cfg.data.d_prime;
  d["sigma"] = cfg.data.sigma;
  d["min_tiles"] = cfg.data.min_tiles;
  d["max_tiles"] = cfg.data.max_tiles;
  d["normal_weight"] = cfg.data.normal_weight;
  d["count"] = cfg.data.count;
  d["split"] = cfg.data.split;
  d["noise"] = cfg.data.noise;
  d["rasters"] = cfg.data.rasters;
  d["raster_width"] = cfg.data.raster_width;
  d["raster_height"] = cfg.data.raster_height;
  j["data"] = d;
  json t;
  t["method"] = std::string(method_name(cfg.train.method));
  t["lr"] = cfg.train.lr;
  t["slides_per_batch"] = cfg.train.slides_per_batch;
  t["tiles_per_slide"] = cfg.train.tiles_per_slide;
  t["patience"] = cfg.train.patience;
  t["max_epochs"] = cfg.train.max_epochs;
  t["margins"] = {{"r_low", cfg.train.margins.r_low},
                  {"r_high", cfg.train.margins.r_high},
                  {"a_low", cfg.train.margins.a_low},
                  {"a_high", cfg.train.margins.a_high}};
  t["alpha"] = cfg.train.alpha;
  t["beta"] = cfg.train.beta;
  j["train"] = t;
  return j;
}

}  // namespace

RunConfig load_run_config(const std::optional<std::filesystem::path>& file) {
  RunConfig cfg;
  if (file) {
    std::ifstream is(*file);
    if (!is) throw std::runtime_error("cannot open config: " + file->string());
    json j;
    try {
      is >> j;
    } catch (const json::exception& e) {
      throw std::runtime_error("config parse error in " + file->string() + ": " + e.what());
    }
    reject_unknown(j, {"seed", "threads", "trials", "data", "train"}, "");
    get_to(j, "seed", cfg.seed);
    get_to(j, "threads", cfg.threads);
    get_to(j, "trials", cfg.trials);
    if (j.contains("data")) parse_data(j.at("data"), cfg.data);
    if (j.contains("train")) parse_train(j.at("train"), cfg.train);
  }
  if (const char* env = std::getenv("WESEG_SEED")) {
    try {
      cfg.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw std::runtime_error("WESEG_SEED is not an integer: " + std::string(env));
    }
  }
  return cfg;
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.method) cfg.train.method = method_from_name(*o.method);
  if (o.lr) cfg.train.lr = *o.lr;
  if (o.trials) cfg.trials = *o.trials;
}

void write_run_config(const std::filesystem::path& path, const RunConfig& cfg) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << to_json(cfg).dump(2) << "\n";
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace weseg::cli
