#include "ekflow/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ekflow {

using nlohmann::json;

namespace {

std::string summarize(const std::vector<ConfigIssue>& list) {
  std::string s = "invalid configuration:";
  for (const auto& i : list) s += "\n  " + i.path + ": " + i.message;
  return s;
}

class Reader {
 public:
  explicit Reader(std::vector<ConfigIssue>& issues) : issues_(issues) {}

  void issue(const std::string& path, const std::string& msg) { issues_.push_back({path, msg}); }

  // Object at `key` of `parent` (may be absent). Reports unknown members.
  const json* object(const json& parent, const std::string& key, const std::string& path,
                     std::initializer_list<const char*> known) {
    if (!parent.is_object() || !parent.contains(key)) return nullptr;
    const json& j = parent.at(key);
    if (!j.is_object()) {
      issue(path, "expected an object");
      return nullptr;
    }
    check_known(j, path, known);
    return &j;
  }

  void check_known(const json& j, const std::string& path, std::initializer_list<const char*> known) {
    std::set<std::string> ok(known.begin(), known.end());
    for (auto it = j.begin(); it != j.end(); ++it)
      if (!ok.count(it.key())) issue(join(path, it.key()), "unknown key");
  }

  void number(const json* obj, const char* key, const std::string& path, Scalar& out) {
    if (!obj || !obj->contains(key)) return;
    const json& j = obj->at(key);
    if (!j.is_number()) return issue(join(path, key), "expected a number");
    out = j.get<Scalar>();
    if (!std::isfinite(out)) issue(join(path, key), "must be finite");
  }

  void optional_number(const json* obj, const char* key, const std::string& path, std::optional<Scalar>& out) {
    if (!obj || !obj->contains(key) || obj->at(key).is_null()) return;
    Scalar v = 0;
    number(obj, key, path, v);
    out = v;
  }

  template <typename Int>
  void integer(const json* obj, const char* key, const std::string& path, Int& out) {
    if (!obj || !obj->contains(key)) return;
    const json& j = obj->at(key);
    if (!j.is_number_integer()) return issue(join(path, key), "expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (j.is_number_unsigned()) out = j.get<Int>();
      else issue(join(path, key), "must be non-negative");
    } else {
      out = j.get<Int>();
    }
  }

  void string(const json* obj, const char* key, const std::string& path, std::string& out) {
    if (!obj || !obj->contains(key)) return;
    const json& j = obj->at(key);
    if (!j.is_string()) return issue(join(path, key), "expected a string");
    out = j.get<std::string>();
  }

  void vec2(const json* obj, const char* key, const std::string& path, Vec2& out) {
    if (!obj || !obj->contains(key)) return;
    if (!vec2_value(obj->at(key), join(path, key), out)) return;
  }

  bool vec2_value(const json& j, const std::string& path, Vec2& out) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
      issue(path, "expected a pair of numbers");
      return false;
    }
    out = {j[0].get<Scalar>(), j[1].get<Scalar>()};
    return true;
  }

  void array(const json* obj, const char* key, const std::string& path, Eigen::ArrayXd& out) {
    if (!obj || !obj->contains(key)) return;
    const json& j = obj->at(key);
    if (!j.is_array()) return issue(join(path, key), "expected an array of numbers");
    out.resize(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k) {
      if (!j[k].is_number()) return issue(join(path, key) + "[" + std::to_string(k) + "]", "expected a number");
      out(static_cast<Eigen::Index>(k)) = j[k].get<Scalar>();
    }
  }

  static std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

 private:
  std::vector<ConfigIssue>& issues_;
};

std::string idx(const std::string& path, std::size_t k) { return path + "[" + std::to_string(k) + "]"; }

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }
json arr_json(const Eigen::ArrayXd& a) { return json(std::vector<Scalar>(a.data(), a.data() + a.size())); }

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> list) : Error(summarize(list)), issues(std::move(list)) {}

Grid SimConfig::make_grid() const {
  const Scalar h = (grid.x_range[1] - grid.x_range[0]) / grid.nx;
  return Grid(grid.nx, grid.ny, h, Vec2(grid.x_range[0], grid.y_range[0]));
}

ShapeSpec SimConfig::make_shape() const {
  if (shape.kind == "polygon") return ShapeSpec::polygon(shape.vertices, shape.center);
  return ShapeSpec::disk(shape.radius, shape.center);
}

SimConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::vector<ConfigIssue>{{"", std::string("malformed JSON: ") + e.what()}});
  }
  std::vector<ConfigIssue> issues;
  Reader rd(issues);
  SimConfig c;
  if (!root.is_object()) throw ConfigError(std::vector<ConfigIssue>{{"", "top level must be an object"}});
  rd.check_known(root, "", {"grid", "shape", "physics", "boundary", "initial", "run"});

  if (auto g = rd.object(root, "grid", "grid", {"nx", "ny", "x_range", "y_range"})) {
    rd.integer(g, "nx", "grid", c.grid.nx);
    rd.integer(g, "ny", "grid", c.grid.ny);
    rd.vec2(g, "x_range", "grid", c.grid.x_range);
    rd.vec2(g, "y_range", "grid", c.grid.y_range);
  }

  if (auto s = rd.object(root, "shape", "shape", {"kind", "radius", "center", "theta", "vertices"})) {
    rd.string(s, "kind", "shape", c.shape.kind);
    rd.number(s, "radius", "shape", c.shape.radius);
    rd.vec2(s, "center", "shape", c.shape.center);
    rd.number(s, "theta", "shape", c.shape.theta);
    if (s->contains("vertices")) {
      const json& v = s->at("vertices");
      if (!v.is_array()) rd.issue("shape.vertices", "expected an array of points");
      else
        for (std::size_t k = 0; k < v.size(); ++k) {
          Vec2 p;
          if (rd.vec2_value(v[k], idx("shape.vertices", k), p)) c.shape.vertices.push_back(p);
        }
    }
  }

  if (auto p = rd.object(root, "physics", "physics",
                         {"kappa1", "kappa2", "eta", "mu_p", "mu_f", "e", "kBT", "species"})) {
    rd.number(p, "kappa1", "physics", c.physics.kappa1);
    rd.number(p, "kappa2", "physics", c.physics.kappa2);
    rd.number(p, "eta", "physics", c.physics.eta);
    rd.number(p, "mu_p", "physics", c.physics.mu_p);
    rd.number(p, "mu_f", "physics", c.physics.mu_f);
    rd.number(p, "e", "physics", c.physics.e);
    rd.number(p, "kBT", "physics", c.physics.kBT);
    if (p->contains("species")) {
      const json& sp = p->at("species");
      c.physics.species.clear();
      if (!sp.is_array()) rd.issue("physics.species", "expected an array");
      else
        for (std::size_t k = 0; k < sp.size(); ++k) {
          const std::string path = idx("physics.species", k);
          SpeciesParams s;
          if (!sp[k].is_object()) {
            rd.issue(path, "expected an object");
            continue;
          }
          rd.check_known(sp[k], path, {"Z", "d"});
          rd.integer(&sp[k], "Z", path, s.Z);
          rd.number(&sp[k], "d", path, s.d);
          c.physics.species.push_back(s);
        }
    }
  }

  if (auto b = rd.object(root, "boundary", "boundary",
                         {"kind", "value", "E0", "offset", "left", "right", "bottom", "top"})) {
    rd.string(b, "kind", "boundary", c.boundary.kind);
    rd.number(b, "value", "boundary", c.boundary.value);
    rd.vec2(b, "E0", "boundary", c.boundary.E0);
    rd.number(b, "offset", "boundary", c.boundary.offset);
    rd.array(b, "left", "boundary", c.boundary.left);
    rd.array(b, "right", "boundary", c.boundary.right);
    rd.array(b, "bottom", "boundary", c.boundary.bottom);
    rd.array(b, "top", "boundary", c.boundary.top);
  }

  if (auto in = rd.object(root, "initial", "initial", {"species", "rho0", "body_velocity", "body_omega"})) {
    if (in->contains("species")) {
      const json& sp = in->at("species");
      c.initial.species.clear();
      if (!sp.is_array()) rd.issue("initial.species", "expected an array");
      else
        for (std::size_t k = 0; k < sp.size(); ++k) {
          const std::string path = idx("initial.species", k);
          SpeciesInit s;
          if (!sp[k].is_object()) {
            rd.issue(path, "expected an object");
            continue;
          }
          rd.check_known(sp[k], path, {"kind", "value", "amplitude", "center", "width", "noise"});
          rd.string(&sp[k], "kind", path, s.kind);
          rd.number(&sp[k], "value", path, s.value);
          rd.number(&sp[k], "amplitude", path, s.amplitude);
          rd.vec2(&sp[k], "center", path, s.center);
          rd.number(&sp[k], "width", path, s.width);
          rd.number(&sp[k], "noise", path, s.noise);
          c.initial.species.push_back(s);
        }
    } else if (root.contains("physics") && root["physics"].is_object() && root["physics"].contains("species")) {
      c.initial.species.assign(c.physics.species.size(), SpeciesInit{});
    }
    if (auto r = rd.object(*in, "rho0", "initial.rho0", {"kind", "total", "offset", "width"})) {
      rd.string(r, "kind", "initial.rho0", c.initial.rho0.kind);
      rd.number(r, "total", "initial.rho0", c.initial.rho0.total);
      rd.vec2(r, "offset", "initial.rho0", c.initial.rho0.offset);
      rd.number(r, "width", "initial.rho0", c.initial.rho0.width);
    }
    rd.vec2(in, "body_velocity", "initial", c.initial.body_velocity);
    rd.number(in, "body_omega", "initial", c.initial.body_omega);
  } else {
    c.initial.species.assign(c.physics.species.size(), SpeciesInit{});
  }

  if (auto r = rd.object(root, "run", "run",
                         {"t_end", "snapshot_every", "tol", "max_iter", "safety", "gamma_min",
                          "force_convention", "seed", "damping", "projection_tol", "poisson_tol", "dt",
                          "max_steps", "dt_halvings"})) {
    rd.number(r, "t_end", "run", c.run.t_end);
    rd.number(r, "snapshot_every", "run", c.run.snapshot_every);
    rd.number(r, "tol", "run", c.run.tol);
    rd.integer(r, "max_iter", "run", c.run.max_iter);
    rd.number(r, "safety", "run", c.run.safety);
    rd.optional_number(r, "gamma_min", "run", c.run.gamma_min);
    rd.string(r, "force_convention", "run", c.run.force_convention);
    rd.integer(r, "seed", "run", c.run.seed);
    rd.number(r, "damping", "run", c.run.damping);
    rd.number(r, "projection_tol", "run", c.run.projection_tol);
    rd.number(r, "poisson_tol", "run", c.run.poisson_tol);
    rd.optional_number(r, "dt", "run", c.run.dt);
    rd.integer(r, "max_steps", "run", c.run.max_steps);
    rd.integer(r, "dt_halvings", "run", c.run.dt_halvings);
  }

  for (auto& v : validate(c))
    if (std::none_of(issues.begin(), issues.end(), [&](const ConfigIssue& i) { return i.path == v.path; }))
      issues.push_back(std::move(v));
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

SimConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::vector<ConfigIssue>{{"", "cannot open " + path}});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::vector<ConfigIssue> validate(const SimConfig& c) {
  std::vector<ConfigIssue> out;
  auto bad = [&](const std::string& p, const std::string& m) { out.push_back({p, m}); };
  auto positive = [&](const std::string& p, Scalar v) {
    if (!(v > 0)) bad(p, "must be positive");
  };

  bool grid_ok = true;
  if (c.grid.nx < 4) bad("grid.nx", "must be at least 4"), grid_ok = false;
  if (c.grid.ny < 4) bad("grid.ny", "must be at least 4"), grid_ok = false;
  const Scalar lx = c.grid.x_range[1] - c.grid.x_range[0], ly = c.grid.y_range[1] - c.grid.y_range[0];
  if (!(lx > 0)) bad("grid.x_range", "upper bound must exceed lower bound"), grid_ok = false;
  if (!(ly > 0)) bad("grid.y_range", "upper bound must exceed lower bound"), grid_ok = false;
  if (grid_ok && std::abs(lx / c.grid.nx - ly / c.grid.ny) > 1e-12 * lx / c.grid.nx)
    bad("grid", "cells must be square: x_range/nx must equal y_range/ny"), grid_ok = false;

  bool shape_ok = true;
  if (c.shape.kind == "disk") {
    if (!(c.shape.radius > 0)) bad("shape.radius", "must be positive"), shape_ok = false;
  } else if (c.shape.kind == "polygon") {
    if (c.shape.vertices.size() < 3) bad("shape.vertices", "a polygon needs at least 3 vertices"), shape_ok = false;
  } else {
    bad("shape.kind", "must be \"disk\" or \"polygon\""), shape_ok = false;
  }

  positive("physics.kappa1", c.physics.kappa1);
  positive("physics.kappa2", c.physics.kappa2);
  positive("physics.eta", c.physics.eta);
  positive("physics.mu_p", c.physics.mu_p);
  positive("physics.mu_f", c.physics.mu_f);
  positive("physics.e", c.physics.e);
  positive("physics.kBT", c.physics.kBT);
  if (c.physics.species.empty()) bad("physics.species", "at least one species is required");
  for (std::size_t k = 0; k < c.physics.species.size(); ++k)
    positive(idx("physics.species", k) + ".d", c.physics.species[k].d);

  if (c.initial.species.size() != c.physics.species.size())
    bad("initial.species", "needs one entry per species in physics.species");
  for (std::size_t k = 0; k < c.initial.species.size(); ++k) {
    const auto& s = c.initial.species[k];
    const std::string p = idx("initial.species", k);
    if (s.kind != "uniform" && s.kind != "blob") bad(p + ".kind", "must be \"uniform\" or \"blob\"");
    if (s.value < 0) bad(p + ".value", "must be non-negative");
    if (s.amplitude < 0) bad(p + ".amplitude", "must be non-negative");
    if (s.kind == "blob") positive(p + ".width", s.width);
    if (s.noise < 0 || s.noise >= 1) bad(p + ".noise", "must lie in [0, 1)");
  }

  const auto& r = c.initial.rho0;
  if (r.kind != "gaussian" && r.kind != "dipole" && r.kind != "none")
    bad("initial.rho0.kind", "must be \"gaussian\", \"dipole\" or \"none\"");
  if (r.kind != "none") positive("initial.rho0.width", r.width);

  if (c.boundary.kind == "tabulated") {
    if (c.boundary.left.size() != c.grid.ny) bad("boundary.left", "needs grid.ny values");
    if (c.boundary.right.size() != c.grid.ny) bad("boundary.right", "needs grid.ny values");
    if (c.boundary.bottom.size() != c.grid.nx) bad("boundary.bottom", "needs grid.nx values");
    if (c.boundary.top.size() != c.grid.nx) bad("boundary.top", "needs grid.nx values");
  } else if (c.boundary.kind != "constant" && c.boundary.kind != "uniform_field") {
    bad("boundary.kind", "must be \"constant\", \"uniform_field\" or \"tabulated\"");
  }

  if (c.run.t_end < 0) bad("run.t_end", "must be non-negative");
  if (c.run.snapshot_every < 0) bad("run.snapshot_every", "must be non-negative");
  positive("run.tol", c.run.tol);
  if (c.run.max_iter < 1) bad("run.max_iter", "must be at least 1");
  if (!(c.run.safety > 0 && c.run.safety <= 1)) bad("run.safety", "must lie in (0, 1]");
  if (c.run.gamma_min) positive("run.gamma_min", *c.run.gamma_min);
  if (c.run.force_convention != "force_per_mass" && c.run.force_convention != "force_per_volume")
    bad("run.force_convention", "must be \"force_per_mass\" or \"force_per_volume\"");
  if (!(c.run.damping > 0 && c.run.damping <= 1)) bad("run.damping", "must lie in (0, 1]");
  positive("run.projection_tol", c.run.projection_tol);
  positive("run.poisson_tol", c.run.poisson_tol);
  if (c.run.dt) positive("run.dt", *c.run.dt);
  if (c.run.max_steps < 0) bad("run.max_steps", "must be non-negative");
  if (c.run.dt_halvings < 0) bad("run.dt_halvings", "must be non-negative");

  if (grid_ok && shape_ok) {
    const Grid g = c.make_grid();
    const ShapeSpec shape = c.make_shape();
    RigidPose pose = shape.reference_pose();
    pose.theta = c.shape.theta;
    const Scalar gap = gap_to_wall(pose, shape, g);
    const Scalar gmin = c.resolved_gamma_min();
    if (!(gap > gmin))
      bad("shape.center", "initial gap " + std::to_string(gap) +
                              " between body and enclosure wall must exceed gamma_min " + std::to_string(gmin));
    if (r.kind != "none") {
      // rho0 must sit strictly inside the body: its 3-sigma disk(s) clear the boundary by a cell
      const Scalar inner = -reference_signed_distance(shape, r.offset);
      const Scalar inner_m = -reference_signed_distance(shape, -r.offset);
      const Scalar need = 3 * r.width + g.h;
      if (inner < need || (r.kind == "dipole" && inner_m < need))
        bad("initial.rho0", "fixed charge support must lie inside the body (3 widths plus one cell)");
    }
    for (std::size_t k = 0; k < c.initial.species.size(); ++k)
      if (c.initial.species[k].kind == "blob" && c.initial.species[k].width < g.h)
        bad(idx("initial.species", k) + ".width", "must be at least one cell");
  }
  return out;
}

std::string config_to_json(const SimConfig& c) {
  json j;
  j["grid"] = {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"x_range", vec_json(c.grid.x_range)},
               {"y_range", vec_json(c.grid.y_range)}};
  json verts = json::array();
  for (const auto& v : c.shape.vertices) verts.push_back(vec_json(v));
  j["shape"] = {{"kind", c.shape.kind}, {"radius", c.shape.radius}, {"center", vec_json(c.shape.center)},
                {"theta", c.shape.theta}, {"vertices", verts}};
  json species = json::array();
  for (const auto& s : c.physics.species) species.push_back({{"Z", s.Z}, {"d", s.d}});
  j["physics"] = {{"kappa1", c.physics.kappa1}, {"kappa2", c.physics.kappa2}, {"eta", c.physics.eta},
                  {"mu_p", c.physics.mu_p},     {"mu_f", c.physics.mu_f},     {"e", c.physics.e},
                  {"kBT", c.physics.kBT},       {"species", species}};
  json b = {{"kind", c.boundary.kind}, {"value", c.boundary.value}, {"E0", vec_json(c.boundary.E0)},
            {"offset", c.boundary.offset}};
  if (c.boundary.kind == "tabulated") {
    b["left"] = arr_json(c.boundary.left);
    b["right"] = arr_json(c.boundary.right);
    b["bottom"] = arr_json(c.boundary.bottom);
    b["top"] = arr_json(c.boundary.top);
  }
  j["boundary"] = b;
  json init_species = json::array();
  for (const auto& s : c.initial.species)
    init_species.push_back({{"kind", s.kind}, {"value", s.value}, {"amplitude", s.amplitude},
                            {"center", vec_json(s.center)}, {"width", s.width}, {"noise", s.noise}});
  j["initial"] = {{"species", init_species},
                  {"rho0",
                   {{"kind", c.initial.rho0.kind},
                    {"total", c.initial.rho0.total},
                    {"offset", vec_json(c.initial.rho0.offset)},
                    {"width", c.initial.rho0.width}}},
                  {"body_velocity", vec_json(c.initial.body_velocity)},
                  {"body_omega", c.initial.body_omega}};
  j["run"] = {{"t_end", c.run.t_end},
              {"snapshot_every", c.run.snapshot_every},
              {"tol", c.run.tol},
              {"max_iter", c.run.max_iter},
              {"safety", c.run.safety},
              {"gamma_min", c.resolved_gamma_min()},
              {"force_convention", c.run.force_convention},
              {"seed", c.run.seed},
              {"damping", c.run.damping},
              {"projection_tol", c.run.projection_tol},
              {"poisson_tol", c.run.poisson_tol},
              {"dt", c.run.dt ? json(*c.run.dt) : json(nullptr)},
              {"max_steps", c.run.max_steps},
              {"dt_halvings", c.run.dt_halvings}};
  return j.dump(2) + "\n";
}

ElectrostaticBC make_boundary(const SimConfig& c, const Grid& g) {
  if (c.boundary.kind == "constant") return ElectrostaticBC::constant(g, c.boundary.value);
  if (c.boundary.kind == "tabulated") {
    ElectrostaticBC bc;
    bc.left = c.boundary.left;
    bc.right = c.boundary.right;
    bc.bottom = c.boundary.bottom;
    bc.top = c.boundary.top;
    return bc;
  }
  // potential offset - E0 . (x - centre of the enclosure)
  const Vec2 mid((c.grid.x_range[0] + c.grid.x_range[1]) / 2, (c.grid.y_range[0] + c.grid.y_range[1]) / 2);
  return ElectrostaticBC::uniform_field(g, c.boundary.E0, c.boundary.offset, mid);
}

}  // namespace ekflow
