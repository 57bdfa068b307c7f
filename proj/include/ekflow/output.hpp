#ifndef EKFLOW_OUTPUT_HPP
#define EKFLOW_OUTPUT_HPP

#include "ekflow/snapshot.hpp"
#include "ekflow/stepper.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ekflow {

Snapshot make_snapshot(const Model& model, const SimState& state, const Accumulated& acc);

struct RestoredState {
  Model model;
  SimState state;
  Accumulated acc;
};
/// Rebuilds model and state from a snapshot (geometry from the stored pose).
RestoredState restore_snapshot(const Snapshot& snap);

/// One CSV line, fields separated by commas, numbers printed with %.17g.
std::string csv_line(const std::vector<Scalar>& row);
std::string csv_header(const std::vector<std::string>& columns);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Scalar>> rows;
  std::vector<Scalar> column(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

struct RunOptions {
  std::string out_dir;                   ///< empty: nothing is written
  std::optional<Scalar> until;           ///< overrides run.t_end
  std::optional<Scalar> snapshot_every;  ///< overrides run.snapshot_every
  bool quiet = true;
  std::function<void(const Simulation&)> on_step;  ///< called after every accepted step
};

struct RunResult {
  std::string stop_reason;  ///< t_end | t_star | max_steps | error
  long steps = 0;
  Scalar t = 0;
  std::vector<Event> events;
  std::vector<std::string> snapshots;  ///< paths written
  std::string error;
};

/// Runs a validated configuration; writes <out>/config.resolved,
/// diagnostics.csv, snapshots/NNNNNN.snap and events.json. On a module error
/// the outputs produced so far are flushed, events.json records the error and
/// the exception propagates.
RunResult run(const SimConfig& cfg, const RunOptions& opts);

std::string events_json(const RunResult& r);

}  // namespace ekflow

#endif  // EKFLOW_OUTPUT_HPP
