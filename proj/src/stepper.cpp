#include "ekflow/stepper.hpp"

#include "ekflow/nernst_planck.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace ekflow {

namespace {

constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

ScalarField reference_fixed_charge(const SimConfig& cfg, const ShapeSpec& shape, const Grid& g) {
  ScalarField rho = g.zeros();
  const auto& r = cfg.initial.rho0;
  if (r.kind == "none" || r.total == 0) return rho;
  auto lobe = [&](const Vec2& offset, Scalar q) {
    const Vec2 c = shape.reference_center + offset;
    ScalarField f = g.zeros();
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const Scalar d2 = (g.cell_center(i, j) - c).squaredNorm();
        if (d2 <= 9 * r.width * r.width) f(i, j) = std::exp(-d2 / (2 * r.width * r.width));
      }
    const Scalar s = f.sum() * g.cell_area();
    if (s > 0) rho += f * (q / s);
  };
  lobe(r.offset, r.total);
  if (r.kind == "dipole") lobe(-r.offset, -r.total);
  return rho;
}

Scalar rel_change(Scalar diff2, Scalar a2, Scalar b2) {
  const Scalar den = std::max(a2, b2);
  return den > 0 ? std::sqrt(diff2 / den) : 0;
}

Scalar rel_change(const ScalarField& a, const ScalarField& b) {
  return rel_change((a - b).square().sum(), a.square().sum(), b.square().sum());
}

Scalar rel_change(const MacVelocity& a, const MacVelocity& b) {
  return rel_change((a.u - b.u).square().sum() + (a.v - b.v).square().sum(),
                    a.u.square().sum() + a.v.square().sum(), b.u.square().sum() + b.v.square().sum());
}

}  // namespace

Model Model::from_config(const SimConfig& cfg) {
  auto issues = validate(cfg);
  if (!issues.empty()) throw ConfigError(std::move(issues));
  Model m;
  m.cfg = cfg;
  m.grid = cfg.make_grid();
  m.shape = cfg.make_shape();
  m.species = cfg.physics.species;
  m.bc = make_boundary(cfg, m.grid);
  m.rho0 = reference_fixed_charge(cfg, m.shape, m.grid);
  m.beta = cfg.physics.e / cfg.physics.kBT;
  m.force_scale = cfg.run.force_convention == "force_per_mass" ? cfg.physics.mu_f : 1;
  m.gamma_min = cfg.resolved_gamma_min();
  return m;
}

PhaseMap Model::phase_of(const RigidPose& pose) const {
  const auto& p = cfg.physics;
  return build_phase_map(pose, shape, grid, p.kappa1, p.kappa2, p.mu_p, p.mu_f);
}

ScalarField solve_potential(const Model& model, const std::vector<ScalarField>& N, const ScalarField& rho,
                            const PhaseMap& phase, const ScalarField* guess) {
  const PoissonOperator op(model.grid, phase.kappa_face);
  return op.solve(assemble_rhs(N, model.species, rho, phase.fluid, model.cfg.physics.e), model.bc,
                  model.cfg.run.poisson_tol, guess);
}

SimState initial_state(const Model& model) {
  const Grid& g = model.grid;
  const SimConfig& cfg = model.cfg;
  SimState s;
  s.pose = model.shape.reference_pose();
  s.pose.theta = cfg.shape.theta;
  s.pose.vc = cfg.initial.body_velocity;
  s.pose.w = cfg.initial.body_omega;
  s.phase = model.phase_of(s.pose);
  s.rho = transport_fixed_charge(model.rho0, model.shape, s.pose, g);

  std::mt19937_64 rng(cfg.run.seed);
  std::uniform_real_distribution<Scalar> unit(-1, 1);
  for (const auto& init : cfg.initial.species) {
    ScalarField n = ScalarField::Constant(g.nx, g.ny, init.value);
    if (init.kind == "blob")
      for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
          n(i, j) += init.amplitude * std::exp(-(g.cell_center(i, j) - init.center).squaredNorm() /
                                               (2 * init.width * init.width));
    if (init.noise > 0)
      for (int k = 0; k < n.size(); ++k) n(k) *= 1 + init.noise * unit(rng);
    s.N.push_back(n * s.phase.fluid);
  }

  s.u = MacVelocity::zeros(g);
  s.p = g.zeros();
  if (s.pose.vc != Vec2::Zero() || s.pose.w != 0) {
    const RigidFluidProjector proj(g, s.phase.mu_face, s.phase.body_face, s.pose.xc);
    const Vec3 V(s.pose.vc.x(), s.pose.vc.y(), s.pose.w);
    proj.write_rigid(s.u, V);
    const ProjectionResult pr = proj.project(s.u, cfg.run.projection_tol);
    s.u = pr.u;
    s.pose.vc = pr.rigid.head<2>();
    s.pose.w = pr.rigid(2);
  }
  s.psi = solve_potential(model, s.N, s.rho, s.phase);
  return s;
}

StepResult picard_step(const Model& model, const SimState& s, Scalar dt, Scalar tol, int max_iter) {
  const Grid& g = model.grid;
  const PhaseMap& ph = s.phase;
  const auto& phys = model.cfg.physics;
  const Scalar theta = model.cfg.run.damping;
  const std::size_t ns = model.species.size();

  const PoissonOperator op(g, ph.kappa_face);
  const RigidFluidProjector proj(g, ph.mu_face, ph.body_face, s.pose.xc);

  ScalarField psi_k = s.psi;
  std::vector<ScalarField> N_k = s.N;
  MacVelocity u_k = s.u;
  ScalarField p_k = s.p;
  Vec3 V_k(s.pose.vc.x(), s.pose.vc.y(), s.pose.w);
  FaceField f_k = FaceField::zeros(g);
  ForceTorque load_k;

  StepResult out;
  PicardReport& rep = out.report;
  for (int it = 1; it <= max_iter; ++it) {
    // P1: potential for the current ion iterate
    ScalarField psi1 =
        op.solve(assemble_rhs(N_k, model.species, s.rho, ph.fluid, phys.e), model.bc, model.cfg.run.poisson_tol, &psi_k);

    // P2: ion transport from the start of the step in the frozen u, psi
    std::vector<ScalarField> N1(ns);
    for (std::size_t i = 0; i < ns; ++i)
      N1[i] = step_np(s.N[i], u_k, psi1, model.species[i], ph, dt, model.beta, g);

    // P3: momentum with the advecting velocity frozen at the previous iterate
    const VectorField grad = electric_field(psi1, g);
    const VectorField F = electric_force_density(N1, grad, model.species, ph.fluid, phys.e);
    FaceField f = cell_to_faces(F, g);
    f.u *= model.force_scale;
    f.v *= model.force_scale;
    MacVelocity ustar = advect_diffuse(s.u, u_k, ph.mu_face, f, phys.eta, dt, g);
    ForceTorque load;
    if (proj.has_body()) {
      load = electric_traction(grad, F, ph, s.pose, phys.kappa2, g);
      load.force *= model.force_scale;
      load.torque *= model.force_scale;
      proj.add_rigid_impulse(ustar, load.force, load.torque, dt);
    }
    ProjectionResult pr = proj.project(ustar, model.cfg.run.projection_tol, dt);

    if (theta < 1) {
      psi1 = theta * psi1 + (1 - theta) * psi_k;
      for (std::size_t i = 0; i < ns; ++i) N1[i] = theta * N1[i] + (1 - theta) * N_k[i];
      pr.u.u = theta * pr.u.u + (1 - theta) * u_k.u;
      pr.u.v = theta * pr.u.v + (1 - theta) * u_k.v;
      pr.rigid = theta * pr.rigid + (1 - theta) * V_k;
    }

    Scalar res = std::max(rel_change(pr.u, u_k), rel_change(psi1, psi_k));
    for (std::size_t i = 0; i < ns; ++i) res = std::max(res, rel_change(N1[i], N_k[i]));

    psi_k = std::move(psi1);
    N_k = std::move(N1);
    u_k = std::move(pr.u);
    p_k = std::move(pr.pressure);
    V_k = pr.rigid;
    f_k = std::move(f);
    load_k = load;

    rep.trace.push_back(res);
    rep.iterations = it;
    rep.final_residual = res;
    if (res <= tol) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged)
    throw PicardError("Picard iteration did not converge in " + std::to_string(max_iter) +
                          " sweeps (residual " + std::to_string(rep.final_residual) + ")",
                      rep.trace);

  // Energy exchanged over the step, with the end-of-step velocity: then
  // Delta E_k = work - dissipation - 1/2 |u1 - u0|^2 + O(dt^2).
  out.energy.dissipated = dt * dirichlet_dissipation_rate(u_k, phys.eta, g);
  out.energy.dissipated_strain = dt * dissipation_rate(u_k, ph, phys.eta, g);
  Scalar power = electric_power(f_k, u_k, g);
  if (proj.has_body()) power += V_k.head<2>().dot(load_k.force) + V_k(2) * load_k.torque;
  out.energy.work = dt * power;
  out.body_load = load_k;

  SimState& n = out.state;
  n.t = s.t + dt;
  n.step = s.step + 1;
  n.pose = s.pose;
  if (proj.has_body()) {
    n.pose.vc = V_k.head<2>();
    n.pose.w = V_k(2);
  }
  out.pose_before_move = n.pose;
  n.pose = advance_pose(n.pose, dt);
  n.u = std::move(u_k);
  n.p = std::move(p_k);
  n.N = std::move(N_k);
  if (n.pose.xc == s.pose.xc && n.pose.theta == s.pose.theta) {
    n.phase = ph;
    n.rho = s.rho;
    n.psi = std::move(psi_k);
  } else {
    n.phase = model.phase_of(n.pose);
    n.rho = transport_fixed_charge(model.rho0, model.shape, n.pose, g);
    for (auto& Ni : n.N) redistribute_covered(Ni, ph, n.phase);
    n.psi = solve_potential(model, n.N, n.rho, n.phase, &psi_k);
  }
  return out;
}

Scalar choose_dt(const Model& model, const SimState& s, Scalar safety) {
  const Grid& g = model.grid;
  const Scalar h = g.h;
  const auto& phys = model.cfg.physics;
  Scalar dt = kInf;
  for (const auto& sp : model.species) dt = std::min(dt, np_stable_dt(s.u, s.psi, sp, model.beta, g, 1));

  const Scalar umax = std::max(s.u.u.abs().maxCoeff(), s.u.v.abs().maxCoeff());
  const Scalar mu_min = std::min(phys.mu_p, phys.mu_f), mu_max = std::max(phys.mu_p, phys.mu_f);
  dt = std::min(dt, h * h * mu_min / (4 * phys.eta));
  if (umax > 0) {
    dt = std::min(dt, h / umax);
    dt = std::min(dt, 2 * phys.eta / (mu_max * umax * umax));
  }
  // closeness of the discrete flow map to the identity: max |grad u| dt <= 1/3
  Scalar grad = 0;
  grad = std::max(grad, (s.u.u.bottomRows(g.nx) - s.u.u.topRows(g.nx)).abs().maxCoeff());
  grad = std::max(grad, (s.u.u.rightCols(g.ny - 1) - s.u.u.leftCols(g.ny - 1)).abs().maxCoeff());
  grad = std::max(grad, (s.u.v.rightCols(g.ny) - s.u.v.leftCols(g.ny)).abs().maxCoeff());
  grad = std::max(grad, (s.u.v.bottomRows(g.nx - 1) - s.u.v.topRows(g.nx - 1)).abs().maxCoeff());
  grad /= h;
  if (grad > 0) dt = std::min(dt, 1 / (3 * grad));
  return safety * dt;
}

Simulation::Simulation(Model model) : model_(std::move(model)), t_end_(model_.cfg.run.t_end) {
  state_ = initial_state(model_);
  const auto& phys = model_.cfg.physics;
  ledger_.start(state_.t, kinetic_energy(state_.u, state_.phase.mu_face, model_.grid),
                electrostatic_energy(state_.psi, model_.grid, state_.phase.kappa_face,
                                     charge_density(state_.N, model_.species, state_.rho, state_.phase.fluid, phys.e),
                                     model_.bc));
}

Simulation::Simulation(Model model, SimState state, Accumulated acc)
    : model_(std::move(model)), state_(std::move(state)), acc_(acc), t_end_(model_.cfg.run.t_end) {
  const auto& phys = model_.cfg.physics;
  ledger_.start(state_.t, kinetic_energy(state_.u, state_.phase.mu_face, model_.grid),
                electrostatic_energy(state_.psi, model_.grid, state_.phase.kappa_face,
                                     charge_density(state_.N, model_.species, state_.rho, state_.phase.fluid, phys.e),
                                     model_.bc));
}

Simulation::Status Simulation::advance() {
  const auto& run = model_.cfg.run;
  const Scalar remaining = t_end_ - state_.t;
  if (remaining <= 1e-12 * std::max(Scalar(1), std::abs(t_end_))) return Status::Finished;
  if (state_.step >= run.max_steps) return Status::MaxSteps;
  const Scalar gap0 = gap_to_wall(state_.pose, model_.shape, model_.grid);
  if (gap0 <= model_.gamma_min) {
    events_.push_back({"t_star", state_.t, state_.step, 0, gap0, "gap at or below gamma_min", {}});
    return Status::TStar;
  }

  Scalar dt = run.dt ? *run.dt : choose_dt(model_, state_, run.safety);
  dt = std::min(dt, remaining);
  if (!(dt > 0) || !std::isfinite(dt)) throw StabilityError("time step controller returned a non-positive dt");

  StepResult r;
  for (int attempt = 0;; ++attempt) {
    try {
      r = picard_step(model_, state_, dt, run.tol, run.max_iter);
      break;
    } catch (const PicardError& e) {
      events_.push_back({"picard_failure", state_.t, state_.step, dt, 0, e.what(), e.residual_trace});
      if (attempt >= run.dt_halvings) throw;
    } catch (const StabilityError& e) {
      events_.push_back({"stability_failure", state_.t, state_.step, dt, 0, e.what(), {}});
      if (attempt >= run.dt_halvings) throw;
    }
    dt /= 2;
  }

  const Scalar gap1 = gap_to_wall(r.state.pose, model_.shape, model_.grid);
  if (gap1 <= model_.gamma_min) {
    // The step would bring the body within gamma_min of the wall: stop at T*.
    events_.push_back({"t_star", state_.t, state_.step, dt, gap0,
                       "next step would reduce the gap to " + std::to_string(gap1), {}});
    return Status::TStar;
  }

  state_ = std::move(r.state);
  const auto& phys = model_.cfg.physics;
  const Scalar ek = kinetic_energy(state_.u, state_.phase.mu_face, model_.grid);
  const Scalar eel = electrostatic_energy(
      state_.psi, model_.grid, state_.phase.kappa_face,
      charge_density(state_.N, model_.species, state_.rho, state_.phase.fluid, phys.e), model_.bc);
  ledger_.record(state_.t, ek, r.energy.dissipated, r.energy.work, eel, r.energy.dissipated_strain);
  acc_.E_d += r.energy.dissipated;
  acc_.E_p += r.energy.work;
  acc_.E_d_strain += r.energy.dissipated_strain;
  acc_.residual = ledger_.residual.back();
  acc_.picard_iters = r.report.iterations;
  r.state = SimState{};
  last_ = std::move(r);
  has_last_ = true;
  return Status::Advanced;
}

Simulation::Status Simulation::run_to_end() {
  for (;;) {
    const Status s = advance();
    if (s != Status::Advanced) return s;
  }
}

const char* status_name(Simulation::Status s) {
  switch (s) {
    case Simulation::Status::Advanced: return "advanced";
    case Simulation::Status::Finished: return "t_end";
    case Simulation::Status::TStar: return "t_star";
    case Simulation::Status::MaxSteps: return "max_steps";
  }
  return "unknown";
}

std::vector<std::string> diagnostic_columns(std::size_t n_species) {
  std::vector<std::string> c = {"t", "E_k", "E_d", "E_p", "E_el", "residual"};
  for (std::size_t i = 0; i < n_species; ++i) c.push_back("moles_" + std::to_string(i));
  for (const char* k : {"total_fixed_charge", "gap", "x_c", "y_c", "theta", "v_cx", "v_cy", "w", "picard_iters",
                        "E_d_strain"})
    c.push_back(k);
  return c;
}

std::vector<Scalar> diagnostic_row(const Model& model, const SimState& s, const Accumulated& acc) {
  const Grid& g = model.grid;
  const auto& phys = model.cfg.physics;
  std::vector<Scalar> row;
  row.push_back(s.t);
  row.push_back(kinetic_energy(s.u, s.phase.mu_face, g));
  row.push_back(acc.E_d);
  row.push_back(acc.E_p);
  row.push_back(electrostatic_energy(s.psi, g, s.phase.kappa_face,
                                     charge_density(s.N, model.species, s.rho, s.phase.fluid, phys.e), model.bc));
  row.push_back(acc.residual);
  for (const auto& Ni : s.N) row.push_back(total_moles(Ni, s.phase, g));
  row.push_back(s.rho.sum() * g.cell_area());
  row.push_back(gap_to_wall(s.pose, model.shape, g));
  row.push_back(s.pose.xc.x());
  row.push_back(s.pose.xc.y());
  row.push_back(s.pose.theta);
  row.push_back(s.pose.vc.x());
  row.push_back(s.pose.vc.y());
  row.push_back(s.pose.w);
  row.push_back(acc.picard_iters);
  row.push_back(acc.E_d_strain);
  return row;
}

}  // namespace ekflow
