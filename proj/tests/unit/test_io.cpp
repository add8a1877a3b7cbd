#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "kbv/io.hpp"
#include "kbv/synth.hpp"

using namespace kbv;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path p = fs::temp_directory_path() / "kbv_unit_io";
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("field files round-trip exactly") {
  const GridSpec g{12, 8, 0.125};
  ScalarField u(g);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = std::sin(0.37 * k) * 1e3 + 1e-9 * k;
  const std::string path = (scratch_dir() / "u.field").string();
  io::write_field(path, u);
  const ScalarField back = io::read_field(path);
  CHECK(back.grid() == g);
  for (std::size_t k = 0; k < u.size(); ++k) CHECK(back[k] == u[k]);
  CHECK(io::read_any(path).grid() == g);
}

TEST_CASE("pgm files round-trip to byte precision") {
  const GridSpec g{16, 10, 0.2};
  ScalarField u(g);
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) u(i, j) = -1.0 + 0.1 * i + 0.05 * j;
  }
  const std::string path = (scratch_dir() / "u.pgm").string();
  const io::PgmScaling s = io::write_pgm(path, u);
  CHECK(fs::exists(path + ".json"));
  const ScalarField back = io::read_any(path);
  CHECK(back.grid() == g);
  for (std::size_t k = 0; k < u.size(); ++k) CHECK(std::abs(back[k] - u[k]) <= 0.5 * s.scale + 1e-12);
  // Row 0 of the file is the top of the image.
  CHECK(back(0, g.ny - 1) == doctest::Approx(u(0, g.ny - 1)).epsilon(0.02));
}

TEST_CASE("pgm without a sidecar") {
  const std::string path = (scratch_dir() / "raw.pgm").string();
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# comment\n4 4\n255\n";
    for (int k = 0; k < 16; ++k) out.put(static_cast<char>(k * 17));
  }
  fs::remove(path + ".json");
  const ScalarField u = io::read_pgm(path, 0.5);
  CHECK(u.grid().h == 0.5);
  CHECK(u.max() == doctest::Approx(1.0));
  CHECK(u.min() == 0.0);
}

TEST_CASE("io failures") {
  try {
    io::read_field((scratch_dir() / "missing.field").string());
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
  const std::string bad = (scratch_dir() / "bad.field").string();
  {
    std::ofstream out(bad);
    out << "{\"nx\": 4, \"ny\": 4, \"h\": 1}\n1234";
  }
  CHECK_THROWS_AS(io::read_field(bad), Error);
}

TEST_CASE("report plumbing") {
  const io::json h = io::report_header("verify");
  CHECK(h["schema_version"] == io::kSchemaVersion);
  CHECK(h["command"] == "verify");
  CHECK(h["timestamp"].get<std::string>().size() == 20);

  const std::string path = (scratch_dir() / "r.json").string();
  io::write_json(path, h);
  CHECK(io::read_json(path) == h);

  const std::string csv = (scratch_dir() / "c.csv").string();
  io::write_csv(csv, "a,b", {{1.0, 2.0}, {3.0, 4.5}});
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "a,b");
}

TEST_CASE("synthetic shapes") {
  const GridSpec g = GridSpec::centered_square(256, 1.0);
  const ScalarField d = synthesize(Shape::Disk, {}, g);
  CHECK(d.integral() == doctest::Approx(std::numbers::pi * 0.25).epsilon(0.01));

  ShapeParams sp;
  sp.period = 1.0;
  const ScalarField s = synthesize(Shape::Stripes, sp, g);
  for (std::size_t k = 0; k < s.size(); ++k) CHECK(std::abs(s[k]) == 1.0);
  CHECK(s.sum() == 0.0);

  ShapeParams zero;
  zero.side = 0.0;
  CHECK_THROWS_AS(synthesize(Shape::Square, zero, g), Error);
  ShapeParams big;
  big.radius = 0.95;
  CHECK_THROWS_AS(synthesize(Shape::Disk, big, g), Error);
  ShapeParams odd;
  odd.period = 0.75;
  CHECK_THROWS_AS(synthesize(Shape::Stripes, odd, g), Error);

  CHECK(parse_shape("steps") == Shape::Steps);
  CHECK_THROWS_AS(parse_shape("blob"), Error);
}
