#include "doctest.h"
#include "support.hpp"

#include "ekflow/diagnostics.hpp"

using namespace ekflow;
using test::Gen;

TEST_CASE("kinetic energy of a uniform stream") {
  const Grid g(12, 7, 0.1);
  MacVelocity u = MacVelocity::zeros(g);
  u.u.setConstant(2);
  FaceField mu = FaceField::zeros(g);
  mu.u.setConstant(1.5);
  mu.v.setConstant(1.5);
  CHECK(kinetic_energy(u, mu, g) == doctest::Approx(0.5 * 1.5 * 4 * g.area()).epsilon(1e-14));
  CHECK(kinetic_energy(MacVelocity::zeros(g), mu, g) == 0);
}

TEST_CASE("dissipation rates") {
  Gen gen(9);
  const Grid g = test::unit_grid(24);
  const ShapeSpec s = ShapeSpec::disk(0.2, Vec2(0.5, 0.5));
  const PhaseMap ph = build_phase_map(s.reference_pose(), s, g, 1, 1, 1, 1);
  CHECK(dissipation_rate(MacVelocity::zeros(g), ph, 1, g) == 0);
  CHECK(dirichlet_dissipation_rate(MacVelocity::zeros(g), 1, g) == 0);
  for (int trial = 0; trial < 10; ++trial) {
    const MacVelocity u = gen.mac(g, 1);
    const Scalar d1 = dissipation_rate(u, ph, 1, g);
    CHECK(d1 > 0);
    CHECK(dissipation_rate(u, ph, 2.5, g) == doctest::Approx(2.5 * d1));
    CHECK(dirichlet_dissipation_rate(u, 2.5, g) == doctest::Approx(2.5 * dirichlet_dissipation_rate(u, 1, g)));
  }

  // cells covered by the body do not dissipate
  RigidPose p;
  p.xc = Vec2(0.5, 0.5);
  p.w = 3;
  MacVelocity rot = rigid_velocity_field(p, g);
  rot.u.row(0).setZero();
  rot.u.row(g.nx).setZero();
  rot.v.col(0).setZero();
  rot.v.col(g.ny).setZero();
  PhaseMap inner = ph;
  inner.chi.setOnes();
  CHECK(dissipation_rate(rot, inner, 1, g) == 0);
}

TEST_CASE("electric power") {
  const Grid g(4, 5, 0.5);
  MacVelocity u = MacVelocity::zeros(g);
  FaceField f = FaceField::zeros(g);
  u.u(2, 3) = 3;
  f.u(2, 3) = -2;
  u.v(1, 2) = 0.5;
  f.v(1, 2) = 4;
  CHECK(electric_power(f, u, g) == doctest::Approx((-6 + 2) * 0.25));
}

TEST_CASE("energy ledger bookkeeping") {
  EnergyLedger L;
  CHECK_THROWS_AS(L.record(1, 0, 0, 0, 0), InvariantViolation);
  L.start(0, 1.0, 5.0);
  CHECK(L.steps() == 0);
  CHECK(energy_residual(L, 0) == 0);
  L.record(0.1, 1.2, 0.05, 0.3, 4.9);
  L.record(0.2, 1.1, 0.15, -0.05, 4.8, 0.1);
  CHECK(L.steps() == 2);
  CHECK(L.E_d.back() == doctest::Approx(0.2));
  CHECK(L.E_p.back() == doctest::Approx(0.25));
  CHECK(L.E_d_strain.back() == doctest::Approx(0.1));
  CHECK(energy_residual(L, 1) == doctest::Approx(0.2 + 0.05 - 0.3));
  CHECK(energy_residual(L, 2) == doctest::Approx(-0.1 + 0.15 + 0.05));
  CHECK(L.residual.back() == doctest::Approx(energy_residual(L, 2)));
}
