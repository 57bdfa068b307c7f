#ifndef EKFLOW_STEPPER_HPP
#define EKFLOW_STEPPER_HPP

#include "ekflow/config.hpp"
#include "ekflow/diagnostics.hpp"
#include "ekflow/fluid.hpp"
#include "ekflow/geometry.hpp"
#include "ekflow/poisson.hpp"

#include <string>
#include <vector>

namespace ekflow {

/// Everything a run needs that does not change in time.
struct Model {
  SimConfig cfg;
  Grid grid;
  ShapeSpec shape;
  std::vector<SpeciesParams> species;
  ElectrostaticBC bc;
  ScalarField rho0;      ///< fixed charge in the reference configuration
  Scalar beta = 1;       ///< e / (k_B theta)
  Scalar force_scale = 1;  ///< mu_f for force_per_mass, 1 for force_per_volume
  Scalar gamma_min = 0;

  static Model from_config(const SimConfig& cfg);
  PhaseMap phase_of(const RigidPose& pose) const;
};

struct SimState {
  Scalar t = 0;
  long step = 0;
  RigidPose pose;
  ScalarField psi;
  std::vector<ScalarField> N;
  MacVelocity u;
  ScalarField p;
  PhaseMap phase;
  ScalarField rho;
};

struct PicardReport {
  int iterations = 0;
  Scalar final_residual = 0;
  bool converged = false;
  std::vector<Scalar> trace;  ///< residual after every sweep
};

/// Energy exchanged during one step, evaluated with the end-of-step velocity.
struct StepEnergy {
  Scalar dissipated = 0;         ///< dt * eta int |grad u|^2
  Scalar dissipated_strain = 0;  ///< dt * 2 eta int_fluid D:D
  Scalar work = 0;               ///< dt * (fluid force power + body load power)
};

struct StepResult {
  SimState state;  ///< advanced in time with the geometry moved
  PicardReport report;
  StepEnergy energy;
  ForceTorque body_load;
  RigidPose pose_before_move;  ///< pose carrying the converged velocities
};

SimState initial_state(const Model& model);

/// Solution of the Poisson problem for the state's concentrations, fixed
/// charge and geometry; `guess` seeds the iteration.
ScalarField solve_potential(const Model& model, const std::vector<ScalarField>& N, const ScalarField& rho,
                            const PhaseMap& phase, const ScalarField* guess = nullptr);

/// One time step: Picard sweeps over potential, ions and momentum with the
/// geometry frozen, then a single geometry update with the converged body
/// velocity. Throws PicardError (with the residual trace) when the sweeps do
/// not reach `tol` in `max_iter`.
StepResult picard_step(const Model& model, const SimState& state, Scalar dt, Scalar tol, int max_iter);

/// safety * min(ion transport bound, h / |u|_max, viscous bound, central
/// advection bound, 1 / (3 max |grad u|)).
Scalar choose_dt(const Model& model, const SimState& state, Scalar safety);

struct Event {
  std::string type;  ///< t_star | picard_failure | stability_failure
  Scalar t = 0;
  long step = 0;
  Scalar dt = 0;
  Scalar gap = 0;
  std::string message;
  std::vector<Scalar> trace;
};

/// Values carried between snapshots that cannot be recomputed from one state.
struct Accumulated {
  Scalar E_d = 0, E_p = 0, residual = 0, E_d_strain = 0;
  int picard_iters = 0;
};

/// Time loop with dt control, dt halving on Picard failure and the T* stop.
class Simulation {
 public:
  enum class Status { Advanced, Finished, TStar, MaxSteps };

  explicit Simulation(Model model);
  Simulation(Model model, SimState state, Accumulated acc);

  /// One accepted step, or the reason none was taken.
  Status advance();
  Status run_to_end();

  const Model& model() const { return model_; }
  const SimState& state() const { return state_; }
  const EnergyLedger& ledger() const { return ledger_; }
  const std::vector<Event>& events() const { return events_; }
  const Accumulated& accumulated() const { return acc_; }
  const StepResult* last_step() const { return has_last_ ? &last_ : nullptr; }
  Scalar t_end() const { return t_end_; }
  void set_t_end(Scalar t) { t_end_ = t; }

 private:
  Model model_;
  SimState state_;
  EnergyLedger ledger_;
  std::vector<Event> events_;
  Accumulated acc_;
  StepResult last_;
  bool has_last_ = false;
  Scalar t_end_ = 0;
};

const char* status_name(Simulation::Status s);

std::vector<std::string> diagnostic_columns(std::size_t n_species);
std::vector<Scalar> diagnostic_row(const Model& model, const SimState& state, const Accumulated& acc);

}  // namespace ekflow

#endif  // EKFLOW_STEPPER_HPP
