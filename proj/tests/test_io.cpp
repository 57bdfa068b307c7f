#include "doctest.h"
#include "support.hpp"

#include "ekflow/output.hpp"
#include "ekflow/plot.hpp"
#include "ekflow/snapshot.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>

using namespace ekflow;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "ekflow_unit" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

SimConfig small_run() {
  SimConfig c;
  c.grid.nx = c.grid.ny = 24;
  c.shape.radius = 0.2;
  c.initial.rho0.width = 0.04;
  c.initial.species[0].noise = 0.1;
  c.run.seed = 4;
  c.run.max_steps = 6;
  c.run.t_end = 1;
  return c;
}

}  // namespace

TEST_CASE("snapshot encoding round-trips bit for bit") {
  test::Gen gen(1);
  Snapshot s;
  s.grid = Grid(5, 3, 0.25, Vec2(-1, 2));
  s.scalars = {{"t", 0.125}, {"tiny", 4.9e-324}, {"neg", -0.0}};
  s.arrays["a"] = gen.field(5, 3, -1, 1);
  s.arrays["b"] = gen.field(6, 3, -1e300, 1e300);
  s.config = std::string("{\"x\": 1}\0tail", 13);
  const std::string bytes = encode_snapshot(s);
  const Snapshot r = decode_snapshot(bytes);
  CHECK(r.grid == s.grid);
  CHECK(r.config == s.config);
  CHECK(std::signbit(r.scalar("neg")));
  CHECK(r.scalar("tiny") == 4.9e-324);
  CHECK((r.array("a") == s.arrays["a"]).all());
  CHECK((r.array("b") == s.arrays["b"]).all());
  CHECK(encode_snapshot(r) == bytes);
  CHECK(bytes.substr(0, 8) == std::string("EKSNAP\0\0", 8));
  CHECK_THROWS_AS(r.scalar("missing"), FormatError);
}

TEST_CASE("corrupt snapshots are rejected") {
  Snapshot s;
  s.grid = Grid(2, 2, 1);
  s.arrays["a"] = ScalarField::Ones(2, 2);
  const std::string bytes = encode_snapshot(s);
  CHECK_THROWS_AS(decode_snapshot(bytes.substr(0, bytes.size() - 3)), FormatError);
  CHECK_THROWS_AS(decode_snapshot(bytes + "x"), FormatError);
  std::string magic = bytes;
  magic[0] = 'X';
  CHECK_THROWS_AS(decode_snapshot(magic), FormatError);
  std::string version = bytes;
  version[8] = 7;
  CHECK_THROWS_WITH_AS(decode_snapshot(version), doctest::Contains("version"), FormatError);
  CHECK_THROWS_AS(read_snapshot("/nonexistent/x.snap"), FormatError);
}

TEST_CASE("csv formatting") {
  CHECK(csv_header({"a", "b"}) == "a,b\r\n");
  CHECK(csv_line({0.1, -2, 0.5}) == "0.10000000000000001,-2,0.5\r\n");
  test::Gen gen(3);
  for (int k = 0; k < 1000; ++k) {
    const Scalar v = gen.uniform(-1, 1) * std::pow(10.0, gen.integer(-300, 300));
    CHECK(std::strtod(csv_line({v}).c_str(), nullptr) == v);
  }
}

TEST_CASE("run outputs, snapshot restore and diagnostic replay") {
  const fs::path dir = scratch("run");
  RunOptions opts;
  opts.out_dir = dir.string();
  const RunResult res = run(small_run(), opts);
  CHECK(res.stop_reason == "max_steps");
  CHECK(res.steps == 6);
  CHECK(fs::exists(dir / "config.resolved"));
  CHECK(fs::exists(dir / "events.json"));
  CHECK(res.snapshots.size() == 7);

  const CsvTable t = read_csv((dir / "diagnostics.csv").string());
  CHECK(t.columns == diagnostic_columns(2));
  REQUIRE(t.rows.size() == 7);
  CHECK(t.column("t").front() == 0);
  CHECK_THROWS_AS(t.column("nope"), FormatError);

  // every snapshot reproduces its csv row exactly
  for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
    const RestoredState r = restore_snapshot(read_snapshot(res.snapshots[k]));
    CHECK(diagnostic_row(r.model, r.state, r.acc) == t.rows[k]);
  }

  // a run resumed from a snapshot continues exactly like the uninterrupted one
  const RestoredState mid = restore_snapshot(read_snapshot(res.snapshots[3]));
  Simulation sim(mid.model, mid.state, mid.acc);
  sim.set_t_end(1);
  for (std::size_t k = 4; k < t.rows.size(); ++k) {
    REQUIRE(sim.advance() == Simulation::Status::Advanced);
    CHECK(diagnostic_row(sim.model(), sim.state(), sim.accumulated()) == t.rows[k]);
  }
}

TEST_CASE("snapshot cadence") {
  const fs::path dir = scratch("cadence");
  SimConfig c = small_run();
  c.run.max_steps = 1000;
  RunOptions opts;
  opts.out_dir = dir.string();
  opts.until = 2e-3;
  opts.snapshot_every = 1e-3;
  const RunResult res = run(c, opts);
  CHECK(res.stop_reason == "t_end");
  CHECK(res.t == doctest::Approx(2e-3).epsilon(1e-12));
  // initial, two cadence points (the last one is the end) at most one extra
  CHECK(res.snapshots.size() >= 3);
  CHECK(res.snapshots.size() <= 4);
  CHECK(read_snapshot(res.snapshots.back()).scalar("t") == doctest::Approx(2e-3).epsilon(1e-12));
}

TEST_CASE("plots are deterministic") {
  const fs::path dir = scratch("plot");
  RunOptions opts;
  opts.out_dir = dir.string();
  run(small_run(), opts);
  const auto first = plot_run(dir.string());
  std::vector<std::string> bytes;
  for (const auto& f : first) bytes.push_back(slurp(f));
  const auto second = plot_run(dir.string());
  REQUIRE(first == second);
  for (std::size_t k = 0; k < first.size(); ++k) CHECK(slurp(first[k]) == bytes[k]);
  CHECK(fs::exists(dir / "plots" / "psi.ppm"));
  CHECK(fs::exists(dir / "plots" / "energy.svg"));
  CHECK(slurp(dir / "plots" / "psi.ppm").substr(0, 2) == "P6");
  CHECK_THROWS_AS(plot_run(scratch("empty").string()), FormatError);
}

TEST_CASE("heatmap layout") {
  ScalarField f(2, 3);
  f << 0, 1, 2, 3, 4, 5;
  const std::string img = heatmap_ppm(f, Colormap::Sequential, 2);
  const std::string head = "P6\n4 6\n255\n";
  REQUIRE(img.substr(0, head.size()) == head);
  CHECK(img.size() == head.size() + 3 * 4 * 6);
  // top-left pixel is cell (0, ny-1), the bottom-right one cell (nx-1, 0)
  const auto px = [&](int x, int y) { return img.substr(head.size() + 3 * (y * 4 + x), 3); };
  CHECK(px(0, 0) == px(1, 1));
  CHECK(px(0, 0) != px(3, 5));
  const std::string svg = timeseries_svg("t", {0, 1, 2}, {{"a", {1, 2, 3}}});
  CHECK(svg.find("<polyline") != std::string::npos);
}
