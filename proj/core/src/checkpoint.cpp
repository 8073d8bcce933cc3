#include "weseg/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace weseg {

namespace {

constexpr int kFormatVersion = 1;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_values(std::ostream& os, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    os << (i ? " " : "") << fmt(values[i]);
  }
  os << "\n";
}

struct Reader {
  std::ifstream is;
  std::string path;

  explicit Reader(const std::filesystem::path& p) : is(p), path(p.string()) {
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  }

  std::string token() {
    std::string t;
    if (!(is >> t)) throw std::runtime_error("truncated checkpoint: " + path);
    return t;
  }

  void expect(const std::string& want) {
    const std::string got = token();
    if (got != want) {
      throw std::runtime_error("malformed checkpoint " + path + ": expected '" +
                               want + "', got '" + got + "'");
    }
  }

  std::size_t count() {
    const std::string t = token();
    try {
      return static_cast<std::size_t>(std::stoull(t));
    } catch (const std::exception&) {
      throw std::runtime_error("malformed checkpoint " + path + ": bad count '" + t + "'");
    }
  }

  double value() {
    double x = 0.0;
    if (!(is >> x)) throw std::runtime_error("malformed checkpoint " + path + ": bad float");
    return x;
  }

  void values(std::span<double> out) {
    for (double& x : out) x = value();
  }
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  ckpt.params.validate();
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write checkpoint: " + path.string());
  os << "weseg-checkpoint " << kFormatVersion << "\n";
  os << "layers " << ckpt.params.layers.size() << "\n";
  for (std::size_t i = 0; i < ckpt.params.layers.size(); ++i) {
    const Layer& l = ckpt.params.layers[i];
    os << "layer " << i << " " << l.out_dim() << " " << l.in_dim() << " "
       << activation_name(l.act) << "\n";
    os << "weight ";
    write_values(os, l.weight.data);
    os << "bias ";
    write_values(os, l.bias);
  }
  if (ckpt.params.attention) {
    const AttentionParams& a = *ckpt.params.attention;
    os << "attention " << a.hidden_dim() << " " << a.emb_dim() << "\n";
    os << "v ";
    write_values(os, a.v.data);
    os << "w ";
    write_values(os, a.w);
    os << "bag_weight ";
    write_values(os, a.bag_weight);
    os << "bag_bias " << fmt(a.bag_bias) << "\n";
  } else {
    os << "attention none\n";
  }
  if (ckpt.standardizer) {
    os << "standardizer " << ckpt.standardizer->dim() << "\n";
    os << "mean ";
    write_values(os, ckpt.standardizer->mean);
    os << "std ";
    write_values(os, ckpt.standardizer->std_dev);
  } else {
    os << "standardizer none\n";
  }
  os << "end\n";
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  r.expect("weseg-checkpoint");
  const std::size_t version = r.count();
  if (version != kFormatVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  r.expect("layers");
  const std::size_t n_layers = r.count();
  for (std::size_t i = 0; i < n_layers; ++i) {
    r.expect("layer");
    if (r.count() != i) throw std::runtime_error("checkpoint layer index out of order");
    const std::size_t out = r.count();
    const std::size_t in = r.count();
    Layer l;
    l.act = activation_from_name(r.token());
    l.weight = Matrix(out, in);
    l.bias.assign(out, 0.0);
    r.expect("weight");
    r.values(l.weight.data);
    r.expect("bias");
    r.values(l.bias);
    ckpt.params.layers.push_back(std::move(l));
  }
  r.expect("attention");
  std::string t = r.token();
  if (t != "none") {
    const std::size_t h = std::stoull(t);
    const std::size_t d = r.count();
    AttentionParams a;
    a.v = Matrix(h, d);
    a.w.assign(h, 0.0);
    a.bag_weight.assign(d, 0.0);
    r.expect("v");
    r.values(a.v.data);
    r.expect("w");
    r.values(a.w);
    r.expect("bag_weight");
    r.values(a.bag_weight);
    r.expect("bag_bias");
    a.bag_bias = r.value();
    ckpt.params.attention = std::move(a);
  }
  r.expect("standardizer");
  t = r.token();
  if (t != "none") {
    const std::size_t d = std::stoull(t);
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.std_dev.assign(d, 0.0);
    r.expect("mean");
    r.values(s.mean);
    r.expect("std");
    r.values(s.std_dev);
    ckpt.standardizer = std::move(s);
  }
  r.expect("end");
  ckpt.params.validate();
  return ckpt;
}

}  // namespace weseg
