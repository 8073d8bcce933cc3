#include "weseg/pnm.hpp"

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

namespace weseg {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

void write_header(std::ostream& os, const char* magic, std::size_t w, std::size_t h) {
  os << magic << "\n" << w << " " << h << "\n255\n";
}

// Reads one whitespace-delimited token, skipping '#' comments.
std::string pnm_token(std::istream& is) {
  std::string t;
  int c = is.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = is.get();
    } else if (std::isspace(c)) {
      c = is.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    t.push_back(static_cast<char>(c));
    c = is.get();
  }
  return t;
}

void read_pnm_header(std::istream& is, const std::string& path, const char* magic,
                     std::size_t& w, std::size_t& h) {
  if (pnm_token(is) != magic) {
    throw std::runtime_error(path + ": not a " + magic + " file");
  }
  try {
    w = std::stoull(pnm_token(is));
    h = std::stoull(pnm_token(is));
    if (pnm_token(is) != "255") throw std::runtime_error("maxval");
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": unsupported NetPBM header (need maxval 255)");
  }
  if (w == 0 || h == 0) throw std::runtime_error(path + ": empty image");
}

}  // namespace

void write_ppm(const std::filesystem::path& path, const RgbImage& image) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_header(os, "P6", image.width, image.height);
  os.write(reinterpret_cast<const char*>(image.pixels.data()),
           static_cast<std::streamsize>(image.pixels.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::size_t w = 0, h = 0;
  read_pnm_header(is, path.string(), "P6", w, h);
  RgbImage img(w, h);
  is.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (is.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw std::runtime_error(path.string() + ": truncated pixel data");
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_header(os, "P5", image.width, image.height);
  os.write(reinterpret_cast<const char*>(image.pixels.data()),
           static_cast<std::streamsize>(image.pixels.size()));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::size_t w = 0, h = 0;
  read_pnm_header(is, path.string(), "P5", w, h);
  GrayImage img(w, h);
  is.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (is.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw std::runtime_error(path.string() + ": truncated pixel data");
  }
  return img;
}

void write_float_map(const std::filesystem::path& path, const FloatMap& map) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  const std::uint64_t w = map.width, h = map.height;
  os.write(reinterpret_cast<const char*>(&w), 8);
  os.write(reinterpret_cast<const char*>(&h), 8);
  os.write(reinterpret_cast<const char*>(map.values.data()),
           static_cast<std::streamsize>(map.values.size() * sizeof(double)));
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

FloatMap read_float_map(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::uint64_t w = 0, h = 0;
  is.read(reinterpret_cast<char*>(&w), 8);
  is.read(reinterpret_cast<char*>(&h), 8);
  if (!is) throw std::runtime_error(path.string() + ": truncated header");
  FloatMap map(w, h);
  is.read(reinterpret_cast<char*>(map.values.data()),
          static_cast<std::streamsize>(map.values.size() * sizeof(double)));
  if (is.gcount() != static_cast<std::streamsize>(map.values.size() * sizeof(double))) {
    throw std::runtime_error(path.string() + ": truncated float data");
  }
  return map;
}

}  // namespace weseg
