#include "ekflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ekflow {

Mat2 RigidPose::Q() const {
  const Scalar c = std::cos(theta), s = std::sin(theta);
  Mat2 q;
  q << c, -s, s, c;
  return q;
}

ShapeSpec ShapeSpec::polygon(std::vector<Vec2> verts, Vec2 center) {
  if (verts.size() < 3) throw GeometryError("polygon shape needs at least three vertices");
  ShapeSpec s;
  s.kind = Kind::Polygon;
  s.vertices = std::move(verts);
  s.reference_center = center;
  return s;
}

namespace {

Scalar polygon_signed_distance(const std::vector<Vec2>& v, const Vec2& p) {
  Scalar d2 = std::numeric_limits<Scalar>::max();
  bool inside = false;
  const std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 e = v[i] - v[j];
    const Vec2 w = p - v[j];
    const Scalar t = std::clamp(w.dot(e) / e.squaredNorm(), Scalar(0), Scalar(1));
    d2 = std::min(d2, (w - t * e).squaredNorm());
    // even-odd crossing test
    if (((v[i].y() > p.y()) != (v[j].y() > p.y())) &&
        (p.x() < (v[j].x() - v[i].x()) * (p.y() - v[i].y()) / (v[j].y() - v[i].y()) + v[i].x()))
      inside = !inside;
  }
  const Scalar d = std::sqrt(d2);
  return inside ? -d : d;
}

// One-cell linear ramp of the signed distance.
Scalar smoothed_indicator(Scalar phi, Scalar h) {
  return std::clamp(Scalar(0.5) - phi / h, Scalar(0), Scalar(1));
}

}  // namespace

Scalar reference_signed_distance(const ShapeSpec& shape, const Vec2& q) {
  if (shape.kind == ShapeSpec::Kind::Disk) return q.norm() - shape.radius;
  return polygon_signed_distance(shape.vertices, q);
}

Scalar signed_distance(const ShapeSpec& shape, const RigidPose& pose, const Vec2& x) {
  const Vec2 q = pose.Q().transpose() * (x - pose.xc);
  return reference_signed_distance(shape, q);
}

Scalar shape_area(const ShapeSpec& shape) {
  if (shape.kind == ShapeSpec::Kind::Disk) return M_PI * shape.radius * shape.radius;
  Scalar a = 0;
  const auto& v = shape.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++)
    a += v[j].x() * v[i].y() - v[i].x() * v[j].y();
  return std::abs(a) / 2;
}

Scalar gap_to_wall(const RigidPose& pose, const ShapeSpec& shape, const Grid& grid) {
  auto wall_gap = [&](const Vec2& p, Scalar pad) {
    return std::min({p.x() - pad - grid.x_min(), grid.x_max() - p.x() - pad,
                     p.y() - pad - grid.y_min(), grid.y_max() - p.y() - pad});
  };
  if (shape.kind == ShapeSpec::Kind::Disk) return wall_gap(pose.xc, shape.radius);
  // Distance to each wall is linear along an edge, so the minimum sits at a vertex.
  const Mat2 q = pose.Q();
  Scalar g = std::numeric_limits<Scalar>::max();
  for (const Vec2& v : shape.vertices) g = std::min(g, wall_gap(pose.xc + q * v, 0));
  return g;
}

PhaseMap build_phase_map(const RigidPose& pose, const ShapeSpec& shape, const Grid& grid,
                         Scalar kappa1, Scalar kappa2, Scalar mu_p, Scalar mu_f) {
  if (gap_to_wall(pose, shape, grid) <= 0)
    throw GeometryError("body intersects the enclosure boundary");

  const int nx = grid.nx, ny = grid.ny;
  const Scalar h = grid.h;
  PhaseMap pm;
  pm.kappa1 = kappa1;
  pm.kappa2 = kappa2;
  pm.mu_p = mu_p;
  pm.mu_f = mu_f;
  pm.phi.resize(nx, ny);
  pm.chi.resize(nx, ny);
  pm.fluid.resize(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Scalar phi = signed_distance(shape, pose, grid.cell_center(i, j));
      pm.phi(i, j) = phi;
      pm.chi(i, j) = smoothed_indicator(phi, h);
      pm.fluid(i, j) = phi > 0 ? 1 : 0;
    }
  pm.mu = mu_p * pm.chi + mu_f * (1 - pm.chi);
  pm.kappa = kappa1 * pm.chi + kappa2 * (1 - pm.chi);

  auto harmonic = [](Scalar a, Scalar b) { return 2 * a * b / (a + b); };
  pm.kappa_face = FaceField::zeros(grid);
  pm.mu_face = FaceField::zeros(grid);
  pm.body_face = FaceField::zeros(grid);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      const int l = std::max(i - 1, 0), r = std::min(i, nx - 1);
      pm.kappa_face.u(i, j) = l == r ? pm.kappa(l, j) : harmonic(pm.kappa(l, j), pm.kappa(r, j));
      pm.mu_face.u(i, j) = (pm.mu(l, j) + pm.mu(r, j)) / 2;
      pm.body_face.u(i, j) = signed_distance(shape, pose, {grid.xf(i), grid.yc(j)}) < 0 ? 1 : 0;
    }
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int b = std::max(j - 1, 0), t = std::min(j, ny - 1);
      pm.kappa_face.v(i, j) = b == t ? pm.kappa(i, b) : harmonic(pm.kappa(i, b), pm.kappa(i, t));
      pm.mu_face.v(i, j) = (pm.mu(i, b) + pm.mu(i, t)) / 2;
      pm.body_face.v(i, j) = signed_distance(shape, pose, {grid.xc(i), grid.yf(j)}) < 0 ? 1 : 0;
    }
  return pm;
}

ScalarField transport_fixed_charge(const ScalarField& rho0, const ShapeSpec& shape,
                                   const RigidPose& pose, const Grid& grid) {
  const int nx = grid.nx, ny = grid.ny;
  const Scalar h = grid.h;
  const Vec2 shift = (pose.xc - shape.reference_center) / h;

  // Aligned pure translations are exact index shifts.
  if (pose.theta == 0 && shift.x() == std::round(shift.x()) && shift.y() == std::round(shift.y())) {
    const int si = static_cast<int>(shift.x()), sj = static_cast<int>(shift.y());
    ScalarField out = ScalarField::Zero(nx, ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        const int i0 = i - si, j0 = j - sj;
        if (i0 >= 0 && i0 < nx && j0 >= 0 && j0 < ny) out(i, j) = rho0(i0, j0);
      }
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        if (out(i, j) != 0 && signed_distance(shape, pose, grid.cell_center(i, j)) >= 0)
          throw InvariantViolation("fixed charge support leaves the body after transport");
    return out;
  }

  const Mat2 qt = pose.Q().transpose();
  ScalarField out = ScalarField::Zero(nx, ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Vec2 ref = qt * (grid.cell_center(i, j) - pose.xc) + shape.reference_center;
      // fractional cell index of the reference point
      const Scalar fx = (ref.x() - grid.x_min()) / h - Scalar(0.5);
      const Scalar fy = (ref.y() - grid.y_min()) / h - Scalar(0.5);
      const int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
      const Scalar sx = fx - i0, sy = fy - j0;
      auto at = [&](int a, int b) -> Scalar {
        return (a >= 0 && a < nx && b >= 0 && b < ny) ? rho0(a, b) : Scalar(0);
      };
      const Scalar val = (1 - sx) * (1 - sy) * at(i0, j0) + sx * (1 - sy) * at(i0 + 1, j0) +
                         (1 - sx) * sy * at(i0, j0 + 1) + sx * sy * at(i0 + 1, j0 + 1);
      if (val == 0) continue;
      if (signed_distance(shape, pose, grid.cell_center(i, j)) >= 0)
        throw InvariantViolation("fixed charge support leaves the body after transport");
      out(i, j) = val;
    }
  return out;
}

MacVelocity rigid_velocity_field(const RigidPose& pose, const Grid& grid) {
  MacVelocity m = MacVelocity::zeros(grid);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i <= grid.nx; ++i) m.u(i, j) = pose.vc.x() - pose.w * (grid.yc(j) - pose.xc.y());
  for (int j = 0; j <= grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) m.v(i, j) = pose.vc.y() + pose.w * (grid.xc(i) - pose.xc.x());
  return m;
}

RigidPose advance_pose(const RigidPose& pose, Scalar dt) {
  RigidPose next = pose;
  next.xc = pose.xc + dt * pose.vc;
  next.theta = pose.theta + dt * pose.w;
  return next;
}

}  // namespace ekflow
