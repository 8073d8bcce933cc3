#include "weseg/manifest.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace weseg {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

constexpr char kFeatureMagic[4] = {'W', 'S', 'F', '1'};
constexpr char kTruthMagic[4] = {'W', 'S', 'T', '1'};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_u16(std::ostream& os, std::uint16_t v) {
  os.write(reinterpret_cast<const char*>(&v), 2);
}

std::uint16_t read_u16(std::istream& is) {
  std::uint16_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 2);
  return v;
}

}  // namespace

void write_features(const std::filesystem::path& path, const Matrix& features) {
  if (features.rows == 0 || features.rows > 0xFFFF || features.cols == 0 ||
      features.cols > 0xFFFF) {
    throw std::invalid_argument("write_features: shape out of format range");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.write(kFeatureMagic, 4);
  write_u16(os, static_cast<std::uint16_t>(features.rows));
  write_u16(os, static_cast<std::uint16_t>(features.cols));
  std::vector<float> row(features.cols);
  for (std::size_t i = 0; i < features.rows; ++i) {
    const auto src = features.row(i);
    for (std::size_t j = 0; j < features.cols; ++j) row[j] = static_cast<float>(src[j]);
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Matrix read_features(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kFeatureMagic, 4) != 0) {
    throw std::runtime_error(path.string() + ": not a feature file");
  }
  const std::size_t n = read_u16(is);
  const std::size_t d = read_u16(is);
  if (!is || n == 0 || d == 0) throw std::runtime_error(path.string() + ": bad header");
  Matrix m(n, d);
  std::vector<float> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (is.gcount() != static_cast<std::streamsize>(row.size() * sizeof(float))) {
      throw std::runtime_error(path.string() + ": truncated features");
    }
    auto dst = m.row(i);
    for (std::size_t j = 0; j < d; ++j) dst[j] = row[j];
  }
  return m;
}

void write_truth(const std::filesystem::path& path,
                 const std::vector<std::uint8_t>& truth) {
  if (truth.empty() || truth.size() > 0xFFFF) {
    throw std::invalid_argument("write_truth: size out of format range");
  }
  for (const std::uint8_t t : truth) {
    if (t > 1) throw std::invalid_argument("write_truth: truth values must be 0/1");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.write(kTruthMagic, 4);
  write_u16(os, static_cast<std::uint16_t>(truth.size()));
  write_u16(os, 0);
  os.write(reinterpret_cast<const char*>(truth.data()),
           static_cast<std::streamsize>(truth.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::uint8_t> read_truth(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kTruthMagic, 4) != 0) {
    throw std::runtime_error(path.string() + ": not a truth file");
  }
  const std::size_t n = read_u16(is);
  read_u16(is);
  std::vector<std::uint8_t> truth(n);
  is.read(reinterpret_cast<char*>(truth.data()), static_cast<std::streamsize>(n));
  if (is.gcount() != static_cast<std::streamsize>(n)) {
    throw std::runtime_error(path.string() + ": truncated truth");
  }
  for (std::uint8_t t : truth) {
    if (t > 1) throw std::runtime_error(path.string() + ": truth values must be 0/1");
  }
  return truth;
}

void write_manifest(const std::filesystem::path& path, const CohortManifest& manifest) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "weseg-cohort 1\n";
  os << "name " << manifest.name << "\n";
  os << "slides " << manifest.entries.size() << "\n";
  for (const ManifestEntry& e : manifest.entries) {
    os << "slide " << e.id << " " << fmt(e.percent) << " " << fmt(e.true_percent)
       << " " << e.label << " " << (e.features_path.empty() ? "-" : e.features_path)
       << " " << (e.truth_path.empty() ? "-" : e.truth_path) << " "
       << (e.image_path.empty() ? "-" : e.image_path) << "\n";
  }
  os << "end\n";
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

CohortManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  auto fail = [&](const std::string& why) {
    throw std::runtime_error(path.string() + ": " + why);
  };
  std::string tok;
  if (!(is >> tok) || tok != "weseg-cohort") fail("not a cohort manifest");
  std::size_t version = 0;
  if (!(is >> version) || version != 1) fail("unsupported version");
  CohortManifest m;
  if (!(is >> tok) || tok != "name") fail("missing name");
  if (!(is >> m.name)) fail("missing name value");
  std::size_t count = 0;
  if (!(is >> tok) || tok != "slides") fail("missing slide count");
  if (!(is >> count)) fail("bad slide count");
  m.entries.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!(is >> tok) || tok != "slide") fail("missing slide row");
    ManifestEntry e;
    if (!(is >> e.id >> e.percent >> e.true_percent >> e.label >> e.features_path >>
          e.truth_path >> e.image_path)) {
      fail("malformed slide row");
    }
    if (e.features_path == "-") e.features_path.clear();
    if (e.truth_path == "-") e.truth_path.clear();
    if (e.image_path == "-") e.image_path.clear();
    m.entries.push_back(std::move(e));
  }
  if (!(is >> tok) || tok != "end") fail("missing end marker");
  return m;
}

Cohort load_cohort(const std::filesystem::path& manifest_path) {
  const CohortManifest m = read_manifest(manifest_path);
  const std::filesystem::path base = manifest_path.parent_path();
  Cohort cohort;
  cohort.name = m.name;
  cohort.slides.reserve(m.entries.size());
  for (const ManifestEntry& e : m.entries) {
    SlideBag bag;
    bag.id = e.id;
    bag.percent = e.percent;
    bag.slide_label = e.label;
    if (e.features_path.empty()) {
      throw std::runtime_error("slide " + e.id + " has no feature file");
    }
    bag.features = read_features(base / e.features_path);
    if (!e.truth_path.empty()) bag.truth = read_truth(base / e.truth_path);
    bag.validate();
    cohort.slides.push_back(std::move(bag));
  }
  return cohort;
}

CohortManifest store_cohort(const std::filesystem::path& dir, const Cohort& cohort,
                            const std::vector<double>& true_percents) {
  if (true_percents.size() != cohort.slides.size()) {
    throw std::invalid_argument("store_cohort: one true percent per slide required");
  }
  std::filesystem::create_directories(dir / "features");
  std::filesystem::create_directories(dir / "truth");
  CohortManifest m;
  m.name = cohort.name;
  for (std::size_t i = 0; i < cohort.slides.size(); ++i) {
    const SlideBag& bag = cohort.slides[i];
    ManifestEntry e;
    e.id = bag.id;
    e.percent = bag.percent;
    e.true_percent = true_percents[i];
    e.label = bag.binary_label();
    e.features_path = "features/" + bag.id + ".wsf";
    write_features(dir / e.features_path, bag.features);
    if (bag.truth) {
      e.truth_path = "truth/" + bag.id + ".wst";
      write_truth(dir / e.truth_path, *bag.truth);
    }
    m.entries.push_back(std::move(e));
  }
  write_manifest(dir / (cohort.name + ".manifest"), m);
  return m;
}

}  // namespace weseg
