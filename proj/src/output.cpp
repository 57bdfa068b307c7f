#include "ekflow/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"

namespace ekflow {

namespace fs = std::filesystem;
using nlohmann::json;

Snapshot make_snapshot(const Model& model, const SimState& s, const Accumulated& acc) {
  Snapshot snap;
  snap.grid = model.grid;
  snap.scalars = {{"t", s.t},
                  {"step", Scalar(s.step)},
                  {"x_c", s.pose.xc.x()},
                  {"y_c", s.pose.xc.y()},
                  {"theta", s.pose.theta},
                  {"v_cx", s.pose.vc.x()},
                  {"v_cy", s.pose.vc.y()},
                  {"w", s.pose.w},
                  {"E_d", acc.E_d},
                  {"E_p", acc.E_p},
                  {"residual", acc.residual},
                  {"E_d_strain", acc.E_d_strain},
                  {"picard_iters", Scalar(acc.picard_iters)},
                  {"n_species", Scalar(s.N.size())}};
  snap.arrays["psi"] = s.psi;
  snap.arrays["u"] = s.u.u;
  snap.arrays["v"] = s.u.v;
  snap.arrays["p"] = s.p;
  snap.arrays["rho"] = s.rho;
  for (std::size_t i = 0; i < s.N.size(); ++i) snap.arrays["N" + std::to_string(i)] = s.N[i];
  snap.config = config_to_json(model.cfg);
  return snap;
}

RestoredState restore_snapshot(const Snapshot& snap) {
  RestoredState r{Model::from_config(parse_config_text(snap.config)), {}, {}};
  if (!(r.model.grid == snap.grid)) throw FormatError("snapshot grid does not match its embedded config");
  SimState& s = r.state;
  s.t = snap.scalar("t");
  s.step = static_cast<long>(snap.scalar("step"));
  s.pose.xc = {snap.scalar("x_c"), snap.scalar("y_c")};
  s.pose.theta = snap.scalar("theta");
  s.pose.vc = {snap.scalar("v_cx"), snap.scalar("v_cy")};
  s.pose.w = snap.scalar("w");
  s.psi = snap.array("psi");
  s.u.u = snap.array("u");
  s.u.v = snap.array("v");
  s.p = snap.array("p");
  s.rho = snap.array("rho");
  const auto ns = static_cast<std::size_t>(snap.scalar("n_species"));
  for (std::size_t i = 0; i < ns; ++i) s.N.push_back(snap.array("N" + std::to_string(i)));
  s.phase = r.model.phase_of(s.pose);
  r.acc.E_d = snap.scalar("E_d");
  r.acc.E_p = snap.scalar("E_p");
  r.acc.residual = snap.scalar("residual");
  r.acc.E_d_strain = snap.scalar("E_d_strain");
  r.acc.picard_iters = static_cast<int>(snap.scalar("picard_iters"));
  return r;
}

std::string csv_line(const std::vector<Scalar>& row) {
  std::string out;
  char buf[40];
  for (std::size_t k = 0; k < row.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", row[k]);
    if (k) out += ',';
    out += buf;
  }
  return out + "\r\n";
}

std::string csv_header(const std::vector<std::string>& columns) {
  std::string out;
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (k) out += ',';
    out += columns[k];
  }
  return out + "\r\n";
}

std::vector<Scalar> CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < columns.size(); ++c)
    if (columns[c] == name) {
      std::vector<Scalar> out;
      for (const auto& r : rows) out.push_back(r.at(c));
      return out;
    }
  throw FormatError("no column '" + name + "' in diagnostics");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  CsvTable t;
  std::string line;
  auto split = [](std::string l) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    std::vector<std::string> f;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    return f;
  };
  if (!std::getline(in, line)) throw FormatError("empty diagnostics file " + path);
  t.columns = split(line);
  while (std::getline(in, line)) {
    auto f = split(line);
    if (f.empty()) continue;
    if (f.size() != t.columns.size()) throw FormatError("ragged row in " + path);
    std::vector<Scalar> row;
    for (const auto& x : f) row.push_back(std::strtod(x.c_str(), nullptr));
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string events_json(const RunResult& r) {
  json ev = json::array();
  for (const auto& e : r.events) {
    json j = {{"type", e.type}, {"t", e.t}, {"step", e.step}, {"dt", e.dt}, {"message", e.message}};
    if (e.type == "t_star") j["gap"] = e.gap;
    if (!e.trace.empty()) j["residual_trace"] = e.trace;
    ev.push_back(j);
  }
  json out = {{"stop_reason", r.stop_reason}, {"steps", r.steps}, {"t", r.t}, {"events", ev}};
  if (!r.error.empty()) out["error"] = r.error;
  return out.dump(2) + "\n";
}

RunResult run(const SimConfig& cfg_in, const RunOptions& opts) {
  SimConfig cfg = cfg_in;
  if (opts.until) cfg.run.t_end = *opts.until;
  if (opts.snapshot_every) cfg.run.snapshot_every = *opts.snapshot_every;

  const bool write = !opts.out_dir.empty();
  fs::path dir(opts.out_dir), snapdir = dir / "snapshots";
  std::ofstream csv;
  RunResult result;
  if (write) {
    fs::create_directories(snapdir);
    std::ofstream(dir / "config.resolved", std::ios::binary) << config_to_json(cfg);
    csv.open(dir / "diagnostics.csv", std::ios::binary);
    if (!csv) throw FormatError("cannot write " + (dir / "diagnostics.csv").string());
  }
  auto write_events = [&] {
    if (write) std::ofstream(dir / "events.json", std::ios::binary) << events_json(result);
  };

  std::unique_ptr<Simulation> sim;
  long last_snap_step = -1;
  Scalar next_snap = 0;
  auto row = [&] {
    if (write) csv << csv_line(diagnostic_row(sim->model(), sim->state(), sim->accumulated()));
  };
  auto emit = [&](bool force) {
    const SimState& s = sim->state();
    const bool due = cfg.run.snapshot_every <= 0 || s.t >= next_snap - 1e-12 * std::max(Scalar(1), s.t);
    if ((due || force) && s.step != last_snap_step) {
      if (write) {
        char name[32];
        std::snprintf(name, sizeof name, "%06ld.snap", s.step);
        const std::string path = (snapdir / name).string();
        write_snapshot(make_snapshot(sim->model(), s, sim->accumulated()), path);
        result.snapshots.push_back(path);
      }
      last_snap_step = s.step;
      if (cfg.run.snapshot_every > 0)
        while (next_snap <= s.t + 1e-12 * std::max(Scalar(1), s.t)) next_snap += cfg.run.snapshot_every;
    }
  };

  try {
    sim = std::make_unique<Simulation>(Model::from_config(cfg));
    if (write) csv << csv_header(diagnostic_columns(cfg.physics.species.size()));
    row();
    emit(true);
    Simulation::Status st;
    while ((st = sim->advance()) == Simulation::Status::Advanced) {
      row();
      emit(false);
      if (opts.on_step) opts.on_step(*sim);
      if (!opts.quiet && sim->state().step % 50 == 0)
        std::cerr << "step " << sim->state().step << "  t = " << sim->state().t << "\n";
    }
    emit(true);
    result.stop_reason = status_name(st);
  } catch (const std::exception& e) {
    result.stop_reason = "error";
    const auto* err = dynamic_cast<const Error*>(&e);
    result.error = std::string(err ? err->kind() : "Error") + ": " + e.what();
    if (sim) {
      result.events = sim->events();
      result.steps = sim->state().step;
      result.t = sim->state().t;
    }
    if (write) csv.flush();
    write_events();
    throw;
  }
  result.events = sim->events();
  result.steps = sim->state().step;
  result.t = sim->state().t;
  if (write) csv.flush();
  write_events();
  return result;
}

}  // namespace ekflow
