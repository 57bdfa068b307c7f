#include "ekflow/validation.hpp"

#include "ekflow/fluid.hpp"
#include "ekflow/nernst_planck.hpp"
#include "ekflow/oracle.hpp"
#include "ekflow/poisson.hpp"

#include <cmath>
#include <random>

#include "json.hpp"

namespace ekflow {

namespace {

const Vec2 kCenter(0.5, 0.5);

// max |dN/dt| over `steps` steps from the Boltzmann profile in a frozen potential.
Scalar boltzmann_rate(int n, int steps) {
  const Grid g(n, n, 1.0 / n);
  const ShapeSpec shape = ShapeSpec::disk(0.15, kCenter);
  const PhaseMap ph = build_phase_map(shape.reference_pose(), shape, g, 1, 1, 1, 1);
  ScalarField psi(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Scalar r = (g.cell_center(i, j) - kCenter).norm();
      psi(i, j) = std::exp(-std::pow((r - 0.15) / 0.1, 2));
    }
  const SpeciesParams sp{1, 1};
  const MacVelocity u = MacVelocity::zeros(g);
  ScalarField N = boltzmann_profile(psi, sp, 1, ph, 1, g);
  const Scalar dt = np_stable_dt(u, psi, sp, 1, g);
  Scalar worst = 0;
  for (int k = 0; k < steps; ++k) {
    ScalarField next = step_np(N, u, psi, sp, ph, dt, 1, g);
    worst = std::max(worst, (next - N).abs().maxCoeff() / dt);
    N = std::move(next);
  }
  return worst;
}

}  // namespace

Scalar dielectric_disk_interior_field(int n, Scalar radius, Scalar kappa1, Scalar kappa2, Scalar E0) {
  const Grid g(n, n, 1.0 / n);
  const ShapeSpec shape = ShapeSpec::disk(radius, kCenter);
  const PhaseMap ph = build_phase_map(shape.reference_pose(), shape, g, kappa1, kappa2, 1, 1);
  const oracle::DiskTransmissionOracle ref(g, g.zeros(), kCenter, radius, kappa1, kappa2,
                                           {Vec2(E0, 0), 0, kCenter});
  const ScalarField psi = solve_poisson(g, ph.kappa_face, g.zeros(), ref.boundary(g), 1e-12);
  const VectorField grad = electric_field(psi, g);
  Scalar sum = 0;
  int count = 0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (ph.phi(i, j) < -2 * g.h) {
        sum += std::hypot(grad.x(i, j), grad.y(i, j));
        ++count;
      }
  if (count == 0) throw GeometryError("disk too small for the grid");
  return sum / count;
}

Scalar charged_disk_l2_error(int n, Scalar kappa1, Scalar kappa2, Scalar E0) {
  const Grid g(n, n, 1.0 / n);
  const Scalar radius = 0.2;
  const ShapeSpec shape = ShapeSpec::disk(radius, kCenter);
  const PhaseMap ph = build_phase_map(shape.reference_pose(), shape, g, kappa1, kappa2, 1, 1);
  ScalarField f = g.zeros();
  const Vec2 c = kCenter + Vec2(0.03, -0.02);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Scalar s = (g.cell_center(i, j) - c).squaredNorm() / (0.1 * 0.1);
      if (s < 1) f(i, j) = std::pow(1 - s, 4);
    }
  const oracle::DiskTransmissionOracle ref(g, f, kCenter, radius, kappa1, kappa2, {Vec2(E0, 0), 0, kCenter});
  const ScalarField psi = solve_poisson(g, ph.kappa_face, -4 * M_PI * f, ref.boundary(g), 1e-12);
  const ScalarField exact = ref.on_grid(g);
  return std::sqrt((psi - exact).square().sum() * g.cell_area());
}

std::vector<ValidationCheck> run_validation_suite() {
  std::vector<ValidationCheck> out;

  {
    const Scalar k1 = 4, k2 = 1, E0 = 1;
    const Scalar expect = 2 * k2 * E0 / (k1 + k2);
    const Scalar got = dielectric_disk_interior_field(64, 0.2, k1, k2, E0);
    const Scalar rel = std::abs(got - expect) / expect;
    out.push_back({"dielectric_disk_interior_field", rel, 0.03, rel <= 0.03,
                   "relative deviation of |E| inside from 2 kappa2 E0 / (kappa1 + kappa2) at h = 1/64"});
  }
  {
    const Scalar e1 = charged_disk_l2_error(32, 2, 1, 1), e2 = charged_disk_l2_error(64, 2, 1, 1);
    const Scalar rate = std::log2(e1 / e2);
    out.push_back({"charged_disk_convergence_rate", rate, 0.9, rate >= 0.9,
                   "observed L2 order against the transmission oracle, h = 1/32 -> 1/64"});
  }
  {
    const Scalar r1 = boltzmann_rate(64, 10), r2 = boltzmann_rate(128, 10);
    out.push_back({"boltzmann_fixed_point_ratio", r1 / r2, 3.6, r1 / r2 >= 3.6,
                   "drop of max|dN/dt| from h = 1/64 to 1/128 (4 for second order)"});
  }
  {
    const Grid g(32, 32, 1.0 / 32);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<Scalar> U(-1, 1);
    MacVelocity u = MacVelocity::zeros(g);
    for (int k = 0; k < u.u.size(); ++k) u.u(k) = U(rng);
    for (int k = 0; k < u.v.size(); ++k) u.v(k) = U(rng);
    const MacVelocity p1 = project_incompressible(u, g, 1e-10).u;
    const MacVelocity p2 = project_incompressible(p1, g, 1e-10).u;
    const Scalar d = std::max((p1.u - p2.u).abs().maxCoeff(), (p1.v - p2.v).abs().maxCoeff());
    out.push_back({"projection_idempotence", d, 1e-8, d <= 1e-8, "max change when projecting a projected field"});
  }
  {
    const Grid g(48, 48, 1.0 / 48);
    const ShapeSpec shape = ShapeSpec::disk(0.2, kCenter);
    const PhaseMap ph = build_phase_map(shape.reference_pose(), shape, g, 1, 1, 2, 1);
    MacVelocity u = MacVelocity::zeros(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) u.u(i, j) = 0.3 + std::pow(g.yc(j) - 0.5, 2);
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) u.v(i, j) = std::sin(3 * g.xc(i));
    auto momentum = [&](const MacVelocity& m) {
      Vec3 p = Vec3::Zero();
      for (int j = 0; j < g.ny; ++j)
        for (int i = 1; i < g.nx; ++i)
          if (ph.body_face.u(i, j) != 0) p += ph.mu_face.u(i, j) * m.u(i, j) * Vec3(1, 0, -(g.yc(j) - 0.5));
      for (int j = 1; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
          if (ph.body_face.v(i, j) != 0) p += ph.mu_face.v(i, j) * m.v(i, j) * Vec3(0, 1, g.xc(i) - 0.5);
      return p;
    };
    const RigidityResult r = enforce_rigidity(u, ph, shape.reference_pose(), g);
    const Scalar d = (momentum(r.u) - momentum(u)).cwiseAbs().maxCoeff() / momentum(u).cwiseAbs().maxCoeff();
    out.push_back({"rigidity_momentum_conservation", d, 1e-10, d <= 1e-10,
                   "relative change of body linear and angular momentum under the rigid overwrite"});
  }
  return out;
}

std::string validation_json(const std::vector<ValidationCheck>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  bool all = true;
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"passed", c.passed},
                   {"detail", c.detail}});
    all = all && c.passed;
  }
  return nlohmann::json{{"passed", all}, {"checks", arr}}.dump(2) + "\n";
}

}  // namespace ekflow
