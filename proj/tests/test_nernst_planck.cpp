#include "doctest.h"
#include "support.hpp"

#include "ekflow/nernst_planck.hpp"

using namespace ekflow;
using test::Gen;

namespace {

// Phase map of an enclosure without a body.
PhaseMap open_phase(const Grid& g) {
  PhaseMap ph;
  ph.phi = ScalarField::Constant(g.nx, g.ny, 1e9);
  ph.chi = g.zeros();
  ph.fluid = ScalarField::Ones(g.nx, g.ny);
  ph.mu = ph.kappa = ph.fluid;
  return ph;
}

PhaseMap disk_phase(const Grid& g, Scalar r, Vec2 c) {
  const ShapeSpec s = ShapeSpec::disk(r, c);
  return build_phase_map(s.reference_pose(), s, g, 1, 1, 1, 1);
}

ScalarField gaussian(const Grid& g, Vec2 c, Scalar var) {
  ScalarField f(g.nx, g.ny);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      f(i, j) = std::exp(-(g.cell_center(i, j) - c).squaredNorm() / (2 * var)) / (2 * M_PI * var);
  return f;
}

Scalar max_flux(const FaceField& J) { return test::max_abs(J); }

}  // namespace

TEST_CASE("uniform state carries no flux") {
  const Grid g = test::unit_grid(16);
  const FaceField J = np_face_fluxes(ScalarField::Constant(16, 16, 2.5), MacVelocity::zeros(g),
                                     ScalarField::Constant(16, 16, 0.7), {1, 1}, ScalarField::Ones(16, 16), 1, g);
  CHECK(max_flux(J) == 0);
  const PhaseMap ph = disk_phase(g, 0.2, Vec2(0.5, 0.5));
  const ScalarField N = ScalarField::Constant(16, 16, 2.5) * ph.fluid;
  CHECK((step_np(N, MacVelocity::zeros(g), g.zeros(), {1, 1}, ph, 1e-4, 1, g) == N).all());
}

TEST_CASE("step profile gives the Fickian flux") {
  const Grid g = test::unit_grid(10);
  ScalarField N = g.zeros();
  N.topRows(4).setConstant(3);  // i < 4
  const FaceField J = np_face_fluxes(N, MacVelocity::zeros(g), g.zeros(), {1, 0.4}, ScalarField::Ones(10, 10), 1, g);
  for (int j = 0; j < 10; ++j) {
    CHECK(J.u(4, j) == doctest::Approx(0.4 * (0 - 3) / g.h));
    for (int i = 0; i <= 10; ++i)
      if (i != 4) CHECK(J.u(i, j) == 0);
  }
  CHECK((J.v == 0).all());
}

TEST_CASE("walls and body faces carry no flux") {
  Gen gen(1);
  const Grid g = test::unit_grid(24);
  const PhaseMap ph = disk_phase(g, 0.2, Vec2(0.45, 0.55));
  const ScalarField N = gen.field(24, 24, 0, 2) * ph.fluid;
  const FaceField J = np_face_fluxes(N, gen.mac(g, 3), gen.field(24, 24, -1, 1), {-2, 0.7}, ph.fluid, 1.3, g);
  CHECK((J.u.row(0) == 0).all());
  CHECK((J.u.row(24) == 0).all());
  CHECK((J.v.col(0) == 0).all());
  CHECK((J.v.col(24) == 0).all());
  for (int j = 0; j < 24; ++j)
    for (int i = 1; i < 24; ++i)
      if (ph.fluid(i - 1, j) == 0 || ph.fluid(i, j) == 0) CHECK(J.u(i, j) == 0);
}

TEST_CASE("Boltzmann profile is an equilibrium to second order") {
  std::vector<Scalar> worst;
  for (int n : {32, 64, 128}) {
    const Grid g = test::unit_grid(n);
    const PhaseMap ph = open_phase(g);
    ScalarField psi(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) psi(i, j) = std::sin(2 * g.xc(i)) * std::cos(3 * g.yc(j));
    const SpeciesParams sp{2, 0.5};
    const ScalarField N = boltzmann_profile(psi, sp, 1, ph, 1.5, g);
    worst.push_back(max_flux(np_face_fluxes(N, MacVelocity::zeros(g), psi, sp, ph.fluid, 1.5, g)));
  }
  CHECK(worst[0] / worst[1] >= 3.5);
  CHECK(worst[1] / worst[2] >= 3.5);
}

TEST_CASE("boltzmann_profile") {
  const Grid g = test::unit_grid(32);
  const PhaseMap ph = disk_phase(g, 0.2, Vec2(0.5, 0.5));
  const Scalar fluid_area = ph.fluid.sum() * g.cell_area();
  const ScalarField flat = boltzmann_profile(ScalarField::Constant(32, 32, 4), {1, 1}, 2, ph, 1, g);
  Gen gen(3);
  const ScalarField rough = gen.field(32, 32, -3, 3);
  const ScalarField neutral = boltzmann_profile(rough, {0, 1}, 2, ph, 1, g);
  for (int j = 0; j < 32; ++j)
    for (int i = 0; i < 32; ++i) {
      const Scalar expect = ph.fluid(i, j) != 0 ? 2 / fluid_area : 0;
      CHECK(flat(i, j) == doctest::Approx(expect).epsilon(1e-13));
      CHECK(neutral(i, j) == doctest::Approx(expect).epsilon(1e-13));
    }
  const ScalarField b = boltzmann_profile(rough, {-1, 1}, 3, ph, 2, g);
  CHECK(total_moles(b, ph, g) == doctest::Approx(3).epsilon(1e-13));
  CHECK(b(3, 4) / b(20, 2) == doctest::Approx(std::exp(2 * (rough(3, 4) - rough(20, 2)))).epsilon(1e-12));
  CHECK_THROWS_AS(boltzmann_profile(rough, {1, 1}, -1, ph, 1, g), InvariantViolation);
}

TEST_CASE("total moles") {
  const Grid g = test::unit_grid(128);
  const PhaseMap ph = disk_phase(g, 0.25, Vec2(0.5, 0.5));
  CHECK(total_moles(g.zeros(), ph, g) == 0);
  CHECK(total_moles(ScalarField::Ones(128, 128), ph, g) ==
        doctest::Approx(1 - M_PI * 0.25 * 0.25).epsilon(2 * M_PI * 0.25 * g.h));
}

TEST_CASE("np_stable_dt") {
  const Grid g(10, 10, 0.1);
  CHECK(np_stable_dt(MacVelocity::zeros(g), g.zeros(), {1, 1}, 1, g) == doctest::Approx(0.9 * 0.0025));
  MacVelocity fast = MacVelocity::zeros(g);
  fast.u.setConstant(1e4);
  const Scalar dt = np_stable_dt(fast, g.zeros(), {1, 1}, 1, g);
  CHECK(dt <= 0.9 * g.h / 1e4);
  CHECK(dt >= 0.2 * 0.9 * g.h / 1e4);
  fast.u.setConstant(2e4);
  CHECK(np_stable_dt(fast, g.zeros(), {1, 1}, 1, g) == doctest::Approx(dt / 2).epsilon(1e-3));
}

TEST_CASE("stable at the returned dt, unstable at four times it") {
  const Grid g = test::unit_grid(16);
  const PhaseMap ph = open_phase(g);
  ScalarField N(16, 16);
  for (int j = 0; j < 16; ++j)
    for (int i = 0; i < 16; ++i) N(i, j) = (i + j) % 2;
  const MacVelocity u = MacVelocity::zeros(g);
  const SpeciesParams sp{1, 1};
  const Scalar dt = np_stable_dt(u, g.zeros(), sp, 1, g);
  ScalarField M = N;
  for (int k = 0; k < 50; ++k) M = step_np(M, u, g.zeros(), sp, ph, dt, 1, g);
  CHECK(M.minCoeff() >= 0);
  CHECK(M.maxCoeff() <= 1);
  CHECK_THROWS_AS(step_np(N, u, g.zeros(), sp, ph, 4 * dt, 1, g), StabilityError);
}

TEST_CASE("Gaussian variance grows by 2 d dt per step") {
  const Grid g = test::unit_grid(64);
  const PhaseMap ph = open_phase(g);
  const SpeciesParams sp{1, 0.3};
  const Vec2 c(0.5, 0.5);
  ScalarField N = gaussian(g, c, 0.004);
  const Scalar dt = np_stable_dt(MacVelocity::zeros(g), g.zeros(), sp, 1, g);
  auto variance_x = [&](const ScalarField& f) {
    Scalar m = 0, s = 0;
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        m += f(i, j);
        s += f(i, j) * std::pow(g.xc(i) - c.x(), 2);
      }
    return s / m;
  };
  for (int k = 0; k < 20; ++k) {
    const ScalarField next = step_np(N, MacVelocity::zeros(g), g.zeros(), sp, ph, dt, 1, g);
    CHECK(variance_x(next) - variance_x(N) == doctest::Approx(2 * sp.d * dt).epsilon(1e-6));
    N = next;
  }
}

TEST_CASE("pure diffusion converges to the heat kernel") {
  const SpeciesParams sp{1, 1};
  const Vec2 c(0.5, 0.5);
  const Scalar v0 = 0.003, T = 0.002;
  std::vector<Scalar> err;
  for (int n : {32, 64, 128}) {
    const Grid g = test::unit_grid(n);
    const PhaseMap ph = open_phase(g);
    ScalarField N = gaussian(g, c, v0);
    const int steps = static_cast<int>(std::ceil(T / np_stable_dt(MacVelocity::zeros(g), g.zeros(), sp, 1, g)));
    for (int k = 0; k < steps; ++k) N = step_np(N, MacVelocity::zeros(g), g.zeros(), sp, ph, T / steps, 1, g);
    err.push_back(std::sqrt((N - gaussian(g, c, v0 + 2 * sp.d * T)).square().sum() * g.cell_area()));
  }
  CHECK(err[0] / err[1] >= 1.8);
  CHECK(err[1] / err[2] >= 1.8);
}

TEST_CASE("random stable steps conserve moles and stay non-negative") {
  Gen gen(2024);
  const Grid g = test::unit_grid(16);
  const PhaseMap ph = disk_phase(g, 0.2, Vec2(0.5, 0.5));
  Scalar worst_drift = 0, lowest = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const SpeciesParams sp{gen.integer(-2, 2), gen.uniform(0.1, 2)};
    const Scalar beta = gen.uniform(0.1, 3);
    const MacVelocity u = gen.mac(g, gen.uniform(0, 30));
    const ScalarField psi = gen.field(16, 16, -2, 2);
    ScalarField N = gen.field(16, 16, 0, 5) * ph.fluid;
    if (trial % 3 == 0) N = (N > 4).cast<Scalar>() * N;  // sparse, sharp data
    const Scalar m0 = total_moles(N, ph, g);
    const Scalar dt = np_stable_dt(u, psi, sp, beta, g);
    for (int k = 0; k < 100; ++k) {
      N = step_np(N, u, psi, sp, ph, dt, beta, g);
      lowest = std::min(lowest, N.minCoeff());
      CHECK(((N * (1 - ph.fluid)) == 0).all());
    }
    if (m0 > 0) worst_drift = std::max(worst_drift, std::abs(total_moles(N, ph, g) - m0) / m0);
  }
  CHECK(worst_drift <= 1e-12);
  CHECK(lowest >= -1e-12);
}

TEST_CASE("1000 steps keep the total to roundoff") {
  Gen gen(77);
  const Grid g = test::unit_grid(32);
  const PhaseMap ph = disk_phase(g, 0.15, Vec2(0.4, 0.6));
  const SpeciesParams sp{1, 1};
  const MacVelocity u = gen.mac(g, 2);
  const ScalarField psi = gen.field(32, 32, 0, 1);
  ScalarField N = ScalarField::Ones(32, 32) * ph.fluid;
  const Scalar m0 = total_moles(N, ph, g);
  const Scalar dt = np_stable_dt(u, psi, sp, 1, g);
  for (int k = 0; k < 1000; ++k) N = step_np(N, u, psi, sp, ph, dt, 1, g);
  CHECK(std::abs(total_moles(N, ph, g) - m0) / m0 <= 1e-10);
}

TEST_CASE("redistribution of covered cells conserves moles") {
  Gen gen(12);
  const Grid g = test::unit_grid(32);
  const ShapeSpec s = ShapeSpec::disk(0.2, Vec2(0.5, 0.5));
  RigidPose p = s.reference_pose();
  PhaseMap ph = build_phase_map(p, s, g, 1, 1, 1, 1);
  ScalarField N = gen.field(32, 32, 0, 1) * ph.fluid;
  const Scalar m0 = N.sum();
  for (int k = 0; k < 40; ++k) {
    p.xc += Vec2(gen.uniform(-1, 1), gen.uniform(-1, 1)) * g.h * 0.7;
    const PhaseMap next = build_phase_map(p, s, g, 1, 1, 1, 1);
    redistribute_covered(N, ph, next);
    ph = next;
    CHECK(((N * (1 - ph.fluid)) == 0).all());
    CHECK(N.minCoeff() >= 0);
  }
  CHECK(N.sum() == doctest::Approx(m0).epsilon(1e-13));
}
