#include "doctest.h"

#include "ekflow/config.hpp"

#include <algorithm>

using namespace ekflow;

namespace {

std::vector<ConfigIssue> issues_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.issues;
  }
  return {};
}

bool has_issue(const std::vector<ConfigIssue>& v, const std::string& path, const std::string& fragment = "") {
  return std::any_of(v.begin(), v.end(), [&](const ConfigIssue& i) {
    return i.path == path && i.message.find(fragment) != std::string::npos;
  });
}

const char* kFull = R"({
  "grid": {"nx": 40, "ny": 30, "x_range": [0, 2], "y_range": [1, 2.5]},
  "shape": {"kind": "disk", "radius": 0.3, "center": [0.9, 1.7], "theta": 0.2},
  "physics": {"kappa1": 3, "kappa2": 1.5, "eta": 0.2, "species": [{"Z": 2, "d": 0.5}]},
  "initial": {"species": [{"kind": "blob", "value": 0.5, "amplitude": 2, "center": [1.5, 2.0], "width": 0.1}],
              "rho0": {"kind": "dipole", "total": 0.2, "offset": [0.1, 0], "width": 0.04}},
  "boundary": {"kind": "uniform_field", "E0": [0, 5], "offset": 1},
  "run": {"t_end": 0.5, "seed": 99, "gamma_min": 0.07, "force_convention": "force_per_volume"}
})";

}  // namespace

TEST_CASE("empty object gives the defaults") {
  const SimConfig c = parse_config_text("{}");
  CHECK(c.grid.nx == 64);
  CHECK(c.physics.species.size() == 2);
  CHECK(c.run.force_convention == "force_per_mass");
  CHECK(validate(c).empty());
  CHECK(c.resolved_gamma_min() == doctest::Approx(2.0 / 64));
}

TEST_CASE("explicit values are read") {
  const SimConfig c = parse_config_text(kFull);
  CHECK(c.grid.nx == 40);
  CHECK(c.make_grid().h == doctest::Approx(0.05));
  CHECK(c.make_grid().origin == Vec2(0, 1));
  CHECK(c.shape.center == Vec2(0.9, 1.7));
  CHECK(c.physics.species.size() == 1);
  CHECK(c.physics.species[0].Z == 2);
  CHECK(c.initial.species[0].kind == "blob");
  CHECK(c.initial.rho0.kind == "dipole");
  CHECK(c.run.seed == 99);
  CHECK(c.resolved_gamma_min() == 0.07);
}

TEST_CASE("resolved configuration round-trips") {
  for (const char* text : {"{}", kFull}) {
    const std::string once = config_to_json(parse_config_text(text));
    CHECK(config_to_json(parse_config_text(once)) == once);
  }
}

TEST_CASE("uniform field boundary is referenced to the enclosure centre") {
  const SimConfig c = parse_config_text(kFull);
  const Grid g = c.make_grid();
  const ElectrostaticBC bc = make_boundary(c, g);
  // Psi = offset - E0 . (x - centre), E0 = (0, 5), centre y = 1.75
  CHECK(bc.bottom(3) == doctest::Approx(1 - 5 * (1 - 1.75)));
  CHECK(bc.top(7) == doctest::Approx(1 - 5 * (2.5 - 1.75)));
  CHECK(bc.left(0) == doctest::Approx(1 - 5 * (g.yc(0) - 1.75)));
}

TEST_CASE("non-positive dielectric coefficient is rejected") {
  const auto v = issues_of(R"({"physics": {"kappa1": -1}})");
  CHECK(has_issue(v, "physics.kappa1", "positive"));
}

TEST_CASE("body too close to the wall is rejected") {
  const auto v = issues_of(R"({"shape": {"radius": 0.3, "center": [0.2, 0.5]}})");
  CHECK(has_issue(v, "shape.center", "initial gap"));
  const auto w = issues_of(R"({"shape": {"center": [0.5, 0.5]}, "run": {"gamma_min": 0.4}})");
  CHECK(has_issue(w, "shape.center", "initial gap"));
}

TEST_CASE("all problems are reported together") {
  const auto v = issues_of(R"({"grid": {"nx": 2}, "physics": {"eta": 0, "bogus": 1}, "run": {"safety": 3}})");
  CHECK(has_issue(v, "grid.nx"));
  CHECK(has_issue(v, "physics.eta"));
  CHECK(has_issue(v, "physics.bogus", "unknown key"));
  CHECK(has_issue(v, "run.safety"));
  CHECK(v.size() >= 4);
}

TEST_CASE("malformed input") {
  CHECK_THROWS_AS(parse_config_text("{ not json"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("[1, 2]"), ConfigError);
  CHECK(!issues_of(R"({"grid": {"nx": "many"}})").empty());
  CHECK(has_issue(issues_of(R"({"grid": {"nx": 40, "ny": 40, "x_range": [0, 2]}})"), "grid", "square"));
  CHECK(has_issue(issues_of(R"({"run": {"force_convention": "newtons"}})"), "run.force_convention"));
  CHECK(!issues_of(R"({"initial": {"rho0": {"offset": [0.14, 0]}}})").empty());
  CHECK_THROWS_AS(parse_config("/nonexistent/config.json"), ConfigError);
}
