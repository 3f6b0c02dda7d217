#include "stretto/matrix_io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace stretto;
namespace fs = std::filesystem;

namespace {
fs::path temp_dir() {
  fs::path p = fs::temp_directory_path() / "stretto_io_test";
  fs::create_directories(p);
  return p;
}
}  // namespace

TEST_CASE("psgf round trip is bit exact") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<float> d(-5.f, 5.f);
  MatF m(13, 29);
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = d(rng);

  fs::path path = temp_dir() / "roundtrip.f32";
  write_psgf(path.string(), m);
  MatF back = read_psgf(path.string());
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  CHECK((back.array() == m.array()).all());
}

TEST_CASE("psgf header layout is explicit little-endian") {
  MatF m(1, 2);
  m << 1.0f, -2.5f;
  fs::path path = temp_dir() / "header.f32";
  write_psgf(path.string(), m);

  std::ifstream f(path, std::ios::binary);
  char buf[12];
  f.read(buf, 12);
  CHECK(std::string(buf, 4) == "PSGF");
  // rows = 1, cols = 2, little endian
  CHECK(static_cast<unsigned char>(buf[4]) == 1);
  CHECK(static_cast<unsigned char>(buf[5]) == 0);
  CHECK(static_cast<unsigned char>(buf[8]) == 2);
  // 1.0f = 0x3f800000 little endian -> 00 00 80 3f
  unsigned char fb[4];
  f.read(reinterpret_cast<char*>(fb), 4);
  CHECK(fb[0] == 0x00);
  CHECK(fb[1] == 0x00);
  CHECK(fb[2] == 0x80);
  CHECK(fb[3] == 0x3f);
}

TEST_CASE("psgf rejects a corrupt magic") {
  fs::path path = temp_dir() / "bad.f32";
  std::ofstream f(path, std::ios::binary);
  f << "JUNKxxxxxxxxxxxxxxxx";
  f.close();
  CHECK_THROWS_AS(read_psgf(path.string()), FormatError);
}

TEST_CASE("eidx round trip preserves ids and fingerprint") {
  IndexFile idx;
  idx.rows = MatF::Random(5, 8);
  idx.ids = {"p0", "p1", "p2", "p3", "p4"};
  idx.fingerprint = 0xdeadbeefcafe1234ull;
  fs::path path = temp_dir() / "t.eidx";
  write_eidx(path.string(), idx);
  IndexFile back = read_eidx(path.string());
  CHECK(back.ids == idx.ids);
  CHECK(back.fingerprint == idx.fingerprint);
  CHECK((back.rows.array() == idx.rows.array()).all());
}

TEST_CASE("missing file raises an io error") {
  CHECK_THROWS_AS(read_psgf("/nonexistent/nope.f32"), IoError);
}
