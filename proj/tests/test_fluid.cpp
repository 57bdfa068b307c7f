#include "doctest.h"
#include "support.hpp"

#include "ekflow/diagnostics.hpp"
#include "ekflow/fluid.hpp"
#include "ekflow/poisson.hpp"

using namespace ekflow;
using test::Gen;

namespace {

Scalar mu_dot(const MacVelocity& a, const MacVelocity& b, const FaceField& mu) {
  return (mu.u * a.u * b.u).sum() + (mu.v * a.v * b.v).sum();
}

// Linear and angular momentum of the body faces, summed independently of the projector.
Vec3 body_momentum(const MacVelocity& m, const PhaseMap& ph, const Vec2& c, const Grid& g) {
  Vec3 p = Vec3::Zero();
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i)
      if (ph.body_face.u(i, j) != 0) p += ph.mu_face.u(i, j) * m.u(i, j) * Vec3(1, 0, -(g.yc(j) - c.y()));
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      if (ph.body_face.v(i, j) != 0) p += ph.mu_face.v(i, j) * m.v(i, j) * Vec3(0, 1, g.xc(i) - c.x());
  return p * g.cell_area();
}

PhaseMap disk(const Grid& g, Scalar r, Vec2 c, Scalar mu_p = 1) {
  const ShapeSpec s = ShapeSpec::disk(r, c);
  return build_phase_map(s.reference_pose(), s, g, 1, 1, mu_p, 1);
}

}  // namespace

TEST_CASE("vector Laplacian of a quadratic field") {
  const Grid g = test::unit_grid(16);
  MacVelocity u = MacVelocity::zeros(g);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) u.u(i, j) = std::pow(g.xf(i), 2) + 2 * std::pow(g.yc(j), 2);
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) u.v(i, j) = g.xc(i) * g.yf(j);
  const MacVelocity L = vector_laplacian(u, g);
  for (int j = 1; j + 1 < g.ny; ++j)
    for (int i = 1; i < g.nx; ++i) CHECK(L.u(i, j) == doctest::Approx(6).epsilon(1e-9));
  for (int j = 1; j < g.ny; ++j)
    for (int i = 1; i + 1 < g.nx; ++i) CHECK(std::abs(L.v(i, j)) <= 1e-9);
  CHECK((L.u.row(0) == 0).all());
  CHECK((L.v.col(0) == 0).all());
}

TEST_CASE("Dirichlet dissipation equals -eta <u, lap u>") {
  Gen gen(31);
  for (int trial = 0; trial < 10; ++trial) {
    const Grid g(gen.integer(6, 20), gen.integer(6, 20), gen.uniform(0.01, 0.2));
    const MacVelocity u = gen.mac(g, 2);
    const Scalar eta = gen.uniform(0.1, 3);
    const Scalar rhs = -eta * test::dot(u, vector_laplacian(u, g)) * g.cell_area();
    CHECK(dirichlet_dissipation_rate(u, eta, g) == doctest::Approx(rhs).epsilon(1e-11));
  }
}

TEST_CASE("advection is skew for divergence-free transport") {
  Gen gen(8);
  for (int trial = 0; trial < 10; ++trial) {
    const Grid g = test::unit_grid(gen.integer(8, 24));
    const MacVelocity a = project_incompressible(gen.mac(g, 3), g, 1e-13).u;
    REQUIRE(divergence(a, g).abs().maxCoeff() <= 1e-12);
    const MacVelocity u = gen.mac(g, 1);
    const Scalar scale = test::dot(u, u) * test::max_abs(a) / g.h;
    CHECK(std::abs(test::dot(u, advection_term(a, u, g))) <= 1e-11 * scale);
  }
}

TEST_CASE("plain projection") {
  Gen gen(17);
  const Grid g = test::unit_grid(24);
  const MacVelocity u = gen.mac(g, 1);
  const ProjectionResult p = project_incompressible(u, g, 1e-10);
  CHECK(divergence(p.u, g).abs().maxCoeff() <= 1e-10);
  const ProjectionResult q = project_incompressible(p.u, g, 1e-10);
  CHECK(test::max_abs(MacVelocity{q.u.u - p.u.u, q.u.v - p.u.v}) <= 1e-8);
  // orthogonal decomposition
  const MacVelocity r{u.u - p.u.u, u.v - p.u.v};
  CHECK(std::abs(test::dot(p.u, r)) <= 1e-8 * test::dot(u, u));
  // wall normal faces stay closed
  CHECK((p.u.u.row(0) == 0).all());
  CHECK((p.u.v.col(g.ny) == 0).all());
}

TEST_CASE("rigid-fluid projection") {
  Gen gen(41);
  const Grid g = test::unit_grid(48);
  const Vec2 c(0.47, 0.53);
  const PhaseMap ph = disk(g, 0.18, c, 3);
  const RigidFluidProjector proj(g, ph.mu_face, ph.body_face, c);
  REQUIRE(proj.has_body());
  for (int trial = 0; trial < 5; ++trial) {
    const MacVelocity u = gen.mac(g, 1);
    const ProjectionResult p = proj.project(u, 1e-10);
    CHECK(divergence(p.u, g).abs().maxCoeff() <= 1e-10);

    // body faces carry exactly the reported rigid motion
    RigidPose rp;
    rp.xc = c;
    rp.vc = p.rigid.head<2>();
    rp.w = p.rigid(2);
    const MacVelocity rig = rigid_velocity_field(rp, g);
    Scalar dev = 0;
    for (int k = 0; k < p.u.u.size(); ++k)
      if (ph.body_face.u(k) != 0) dev = std::max(dev, std::abs(p.u.u(k) - rig.u(k)));
    for (int k = 0; k < p.u.v.size(); ++k)
      if (ph.body_face.v(k) != 0) dev = std::max(dev, std::abs(p.u.v(k) - rig.v(k)));
    CHECK(dev <= 1e-12);

    const ScalarField m = strain_magnitude(cell_strain(p.u, g));
    for (int k = 0; k < m.size(); ++k)
      if (ph.phi(k) <= -2 * g.h) CHECK(m(k) <= 1e-10);

    // mu-orthogonality of the correction
    const MacVelocity r{u.u - p.u.u, u.v - p.u.v};
    CHECK(std::abs(mu_dot(p.u, r, ph.mu_face)) <= 1e-8 * mu_dot(u, u, ph.mu_face));
    const ProjectionResult q = proj.project(p.u, 1e-10);
    CHECK(test::max_abs(MacVelocity{q.u.u - p.u.u, q.u.v - p.u.v}) <= 1e-8);
  }
}

TEST_CASE("rigid fit, write and impulse") {
  const Grid g = test::unit_grid(40);
  const Vec2 c(0.5, 0.45);
  const PhaseMap ph = disk(g, 0.2, c, 2);
  const RigidFluidProjector proj(g, ph.mu_face, ph.body_face, c);
  MacVelocity u = MacVelocity::zeros(g);
  const Vec3 V(0.3, -0.7, 1.9);
  proj.write_rigid(u, V);
  CHECK((proj.rigid_fit(u) - V).norm() <= 1e-13);

  const Vec3 before = body_momentum(u, ph, c, g);
  const Vec2 F(0.4, -1.1);
  const Scalar T = 0.25, dt = 0.01;
  proj.add_rigid_impulse(u, F, T, dt);
  CHECK((body_momentum(u, ph, c, g) - before - dt * Vec3(F.x(), F.y(), T)).norm() <= 1e-13);
}

TEST_CASE("discrete inertia approaches the continuum values") {
  const Scalar r = 0.2, mu_p = 2.5;
  Scalar prev = 1e300;
  for (int n : {32, 64, 128}) {
    const Grid g = test::unit_grid(n);
    const Vec2 c(0.5, 0.5);
    const PhaseMap ph = disk(g, r, c, mu_p);
    RigidPose p;
    p.xc = c;
    const BodyInertia I = body_inertia(ph, p, g);
    const Scalar M = mu_p * M_PI * r * r, A = M * r * r / 2;
    const Scalar err = std::max(std::abs(I.M - M) / M, std::abs(I.A - A) / A);
    CHECK(err <= 4 * g.h / r);
    CHECK(err < prev);
    prev = err;
    CHECK(I.matrix(0, 0) == I.M);
    CHECK(I.matrix(2, 2) == I.A);
  }
}

TEST_CASE("rigidity overwrite conserves body momentum") {
  Gen gen(55);
  const Grid g = test::unit_grid(40);
  for (int trial = 0; trial < 10; ++trial) {
    const ShapeSpec s = ShapeSpec::disk(gen.uniform(0.1, 0.25), Vec2(0.5, 0.5));
    RigidPose p = gen.pose_in_box(s.radius, 0.05);
    const PhaseMap ph = build_phase_map(p, s, g, 1, 1, gen.uniform(0.5, 5), 1);
    const MacVelocity u = gen.mac(g, 1);
    const RigidityResult r = enforce_rigidity(u, ph, p, g);
    const Vec3 m0 = body_momentum(u, ph, p.xc, g), m1 = body_momentum(r.u, ph, p.xc, g);
    CHECK((m1 - m0).cwiseAbs().maxCoeff() <= 1e-12 * m0.cwiseAbs().maxCoeff() + 1e-15);
    const RigidityResult again = enforce_rigidity(r.u, ph, r.pose, g);
    CHECK(test::max_abs(MacVelocity{again.u.u - r.u.u, again.u.v - r.u.v}) <= 1e-13);
  }
  const PhaseMap empty = disk(g, 0.004, Vec2(0.5, 0.5));
  CHECK_THROWS_AS(enforce_rigidity(MacVelocity::zeros(g), empty, RigidPose{}, g), GeometryError);
}

TEST_CASE("electric load on a charged body in a uniform field") {
  const int n = 96;
  const Grid g = test::unit_grid(n);
  const Vec2 c(0.5, 0.5);
  const ShapeSpec s = ShapeSpec::disk(0.15, c);
  RigidPose pose = s.reference_pose();
  const Scalar k1 = 2, k2 = 1, Q = 0.3, E0 = 1.5;
  const PhaseMap ph = build_phase_map(pose, s, g, k1, k2, 1, 1);
  const Vec2 off(0.04, 0.03);
  ScalarField rho = g.zeros();
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Scalar d2 = (g.cell_center(i, j) - c - off).squaredNorm();
      if (d2 < 9 * 0.03 * 0.03) rho(i, j) = std::exp(-d2 / (2 * 0.03 * 0.03));
    }
  rho *= Q / (rho.sum() * g.cell_area());
  const ElectrostaticBC bc = ElectrostaticBC::uniform_field(g, Vec2(E0, 0), 0, c);
  const ScalarField psi = solve_poisson(g, ph.kappa_face, -4 * M_PI * rho, bc, 1e-12);
  const VectorField grad = electric_field(psi, g);
  const ForceTorque ft = electric_traction(grad, VectorField::zeros(g), ph, pose, k2, g);
  // F = Q E0 and T = off x (Q E0); the image forces of a centred body cancel
  CHECK(ft.force.x() == doctest::Approx(Q * E0).epsilon(0.05));
  CHECK(std::abs(ft.force.y()) <= 0.05 * Q * E0);
  CHECK(ft.torque == doctest::Approx(-off.y() * Q * E0).epsilon(0.1));
}

TEST_CASE("constant stress exerts no load") {
  const Grid g = test::unit_grid(48);
  const PhaseMap ph = disk(g, 0.2, Vec2(0.52, 0.49));
  TensorField sigma{ScalarField::Constant(48, 48, 2), ScalarField::Constant(48, 48, -0.5),
                    ScalarField::Constant(48, 48, 1)};
  RigidPose p;
  p.xc = Vec2(0.52, 0.49);
  const ForceTorque ft = shell_traction(sigma, VectorField::zeros(g), ph, p, g);
  CHECK(ft.force.norm() <= 1e-12);
  const ScalarField w = shell_weight(ph, g);
  CHECK(w.minCoeff() >= 0);
  CHECK(w.maxCoeff() <= 1);
  for (int k = 0; k < w.size(); ++k) {
    if (ph.phi(k) <= 1.5 * g.h) CHECK(w(k) == 1);
    if (ph.phi(k) >= 3.5 * g.h) CHECK(w(k) == 0);
  }
}

TEST_CASE("electric force density and face averaging") {
  const Grid g = test::unit_grid(8);
  const std::vector<SpeciesParams> sp = {{1, 1}, {-2, 1}};
  const std::vector<ScalarField> N = {ScalarField::Constant(8, 8, 3), ScalarField::Constant(8, 8, 1)};
  VectorField grad{ScalarField::Constant(8, 8, 2), ScalarField::Constant(8, 8, -1)};
  ScalarField fluid = ScalarField::Ones(8, 8);
  fluid(4, 4) = 0;
  const VectorField F = electric_force_density(N, grad, sp, fluid, 0.5);
  CHECK(F.x(0, 0) == doctest::Approx(-0.5 * (3 - 2) * 2));
  CHECK(F.y(0, 0) == doctest::Approx(-0.5 * (3 - 2) * -1));
  CHECK(F.x(4, 4) == 0);
  const FaceField f = cell_to_faces(F, g);
  CHECK(f.u(4, 4) == doctest::Approx(F.x(3, 4) / 2));
  CHECK((f.u.row(0) == 0).all());
}

TEST_CASE("momentum update rejects non-finite data") {
  const Grid g = test::unit_grid(8);
  MacVelocity u = MacVelocity::zeros(g);
  u.u(3, 3) = std::nan("");
  FaceField ones = FaceField::zeros(g);
  ones.u.setOnes();
  ones.v.setOnes();
  CHECK_THROWS_AS(advect_diffuse(u, u, ones, FaceField::zeros(g), 1, 1e-3, g), StabilityError);
}
