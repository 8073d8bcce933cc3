#include <fstream>
#include <stdexcept>

#include <doctest.h>

#include "support.hpp"
#include "weseg/pnm.hpp"
#include "weseg/rng.hpp"

using namespace weseg;

TEST_SUITE("pnm") {

TEST_CASE("ppm round-trip") {
  testutil::TempDir dir("pnm_ppm");
  Rng rng(1);
  RgbImage img(37, 21);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  const auto path = dir.path / "img.ppm";
  write_ppm(path, img);
  const auto back = read_ppm(path);
  CHECK(back.width == img.width);
  CHECK(back.height == img.height);
  CHECK(back.pixels == img.pixels);
}

TEST_CASE("pgm round-trip") {
  testutil::TempDir dir("pnm_pgm");
  Rng rng(2);
  GrayImage img(19, 33);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.below(256));
  const auto path = dir.path / "img.pgm";
  write_pgm(path, img);
  const auto back = read_pgm(path);
  CHECK(back.width == img.width);
  CHECK(back.height == img.height);
  CHECK(back.pixels == img.pixels);
}

TEST_CASE("header comments are skipped") {
  testutil::TempDir dir("pnm_comment");
  const auto path = dir.path / "c.pgm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# a comment line\n2 1\n# another\n255\n";
    out.put(static_cast<char>(7));
    out.put(static_cast<char>(250));
  }
  const auto img = read_pgm(path);
  REQUIRE(img.width == 2);
  REQUIRE(img.height == 1);
  CHECK(img.at(0, 0) == 7);
  CHECK(img.at(1, 0) == 250);
}

TEST_CASE("wrong magic or maxval is rejected") {
  testutil::TempDir dir("pnm_bad");
  {
    std::ofstream out(dir.path / "p4.pbm", std::ios::binary);
    out << "P4\n2 2\n";
  }
  CHECK_THROWS_AS(read_pgm(dir.path / "p4.pbm"), std::runtime_error);
  CHECK_THROWS_AS(read_ppm(dir.path / "p4.pbm"), std::runtime_error);
  {
    std::ofstream out(dir.path / "deep.pgm", std::ios::binary);
    out << "P5\n2 2\n65535\n";
    for (int i = 0; i < 8; ++i) out.put(0);
  }
  CHECK_THROWS_AS(read_pgm(dir.path / "deep.pgm"), std::runtime_error);
  {
    std::ofstream out(dir.path / "short.ppm", std::ios::binary);
    out << "P6\n4 4\n255\n";
    out.put(1);  // far fewer than 48 bytes
  }
  CHECK_THROWS_AS(read_ppm(dir.path / "short.ppm"), std::runtime_error);
}

TEST_CASE("float map round-trips bit-exactly") {
  testutil::TempDir dir("pnm_f64");
  Rng rng(3);
  FloatMap map(11, 7);
  for (auto& v : map.values) v = rng.uniform(-1e9, 1e9);
  map.values[3] = 0.1 + 0.2;  // not representable exactly, still must round-trip
  const auto path = dir.path / "map.f64";
  write_float_map(path, map);
  const auto back = read_float_map(path);
  CHECK(back.width == map.width);
  CHECK(back.height == map.height);
  CHECK(back.values == map.values);
}

}  // TEST_SUITE
