// ekflow command-line driver: run, check, diag, plot, oracle.

#include "ekflow/config.hpp"
#include "ekflow/output.hpp"
#include "ekflow/plot.hpp"
#include "ekflow/snapshot.hpp"
#include "ekflow/stepper.hpp"
#include "ekflow/validation.hpp"

#include <Eigen/Core>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

int fail(const std::exception& e) {
  nlohmann::json j;
  if (const auto* ce = dynamic_cast<const ekflow::ConfigError*>(&e)) {
    j["error"] = ce->kind();
    j["message"] = "invalid configuration";
    nlohmann::json issues = nlohmann::json::array();
    for (const auto& i : ce->issues) issues.push_back({{"path", i.path}, {"message", i.message}});
    j["issues"] = issues;
  } else if (const auto* ee = dynamic_cast<const ekflow::Error*>(&e)) {
    j["error"] = ee->kind();
    j["message"] = ee->what();
  } else {
    j["error"] = "Error";
    j["message"] = e.what();
  }
  std::cerr << j.dump() << "\n";
  return dynamic_cast<const ekflow::ConfigError*>(&e) ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ekflow: charged rigid particle in an electrolyte (2D Poisson-Nernst-Planck-Navier-Stokes)"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "ekflow_out", run_dir;
  std::vector<std::string> snapshot_paths;
  double until = -1, snapshot_every = -1;
  bool quiet = false;
  int threads = 1;

  auto* run = app.add_subcommand("run", "run a simulation");
  run->add_option("config", config_path, "configuration file (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_option("--until", until, "override run.t_end");
  run->add_option("--snapshot-every", snapshot_every, "override run.snapshot_every");
  run->add_flag("--quiet", quiet, "no progress output");
  run->add_option("--threads", threads, "worker threads for Eigen kernels")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check", "validate a configuration and print it fully resolved");
  check->add_option("config", config_path, "configuration file (JSON)")->required()->check(CLI::ExistingFile);

  auto* diag = app.add_subcommand("diag", "recompute diagnostic rows from snapshots");
  diag->add_option("snapshots", snapshot_paths, "snapshot files")->required()->check(CLI::ExistingFile);

  auto* plot = app.add_subcommand("plot", "write heatmaps and time-series charts of a run");
  plot->add_option("run_dir", run_dir, "run output directory")->required()->check(CLI::ExistingDirectory);

  auto* oracle = app.add_subcommand("oracle", "run the analytic validation suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      Eigen::setNbThreads(threads);
      ekflow::RunOptions opts;
      opts.out_dir = out_dir;
      if (until >= 0) opts.until = until;
      if (snapshot_every >= 0) opts.snapshot_every = snapshot_every;
      opts.quiet = quiet;
      const auto res = ekflow::run(ekflow::parse_config(config_path), opts);
      if (!quiet) std::cout << ekflow::events_json(res);
      return 0;
    }
    if (*check) {
      std::cout << ekflow::config_to_json(ekflow::parse_config(config_path));
      return 0;
    }
    if (*diag) {
      bool header = false;
      for (const auto& p : snapshot_paths) {
        const auto r = ekflow::restore_snapshot(ekflow::read_snapshot(p));
        if (!header) {
          std::cout << ekflow::csv_header(ekflow::diagnostic_columns(r.state.N.size()));
          header = true;
        }
        std::cout << ekflow::csv_line(ekflow::diagnostic_row(r.model, r.state, r.acc));
      }
      return 0;
    }
    if (*plot) {
      for (const auto& f : ekflow::plot_run(run_dir)) std::cout << f << "\n";
      return 0;
    }
    if (*oracle) {
      const auto checks = ekflow::run_validation_suite();
      std::cout << ekflow::validation_json(checks);
      for (const auto& c : checks)
        if (!c.passed) return 1;
      return 0;
    }
  } catch (const std::exception& e) {
    return fail(e);
  }
  return 0;
}
