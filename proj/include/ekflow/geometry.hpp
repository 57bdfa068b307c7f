#ifndef EKFLOW_GEOMETRY_HPP
#define EKFLOW_GEOMETRY_HPP

#include "ekflow/types.hpp"

#include <vector>

namespace ekflow {

/// Position, orientation and velocities of the particle. In 2D the rotation
/// is carried by its angle; Q() rebuilds an exactly orthonormal matrix.
struct RigidPose {
  Vec2 xc = Vec2::Zero();
  Scalar theta = 0;
  Vec2 vc = Vec2::Zero();
  Scalar w = 0;

  Mat2 Q() const;
  /// Rigid velocity v_c + w x (x - x_c) at a point.
  Vec2 velocity_at(const Vec2& x) const {
    const Vec2 r = x - xc;
    return {vc.x() - w * r.y(), vc.y() + w * r.x()};
  }
  bool operator==(const RigidPose&) const = default;
};

/// Body shape in its reference frame. A disk, or a closed polygon whose
/// vertices are given relative to the reference centre (a finely sampled
/// polygon stands in for a smooth boundary).
struct ShapeSpec {
  enum class Kind { Disk, Polygon };
  Kind kind = Kind::Disk;
  Scalar radius = 0;
  std::vector<Vec2> vertices;
  /// Centre of mass at t = 0; the reference pose is (reference_center, 0).
  Vec2 reference_center = Vec2::Zero();

  static ShapeSpec disk(Scalar r, Vec2 center) {
    ShapeSpec s;
    s.radius = r;
    s.reference_center = center;
    return s;
  }
  static ShapeSpec polygon(std::vector<Vec2> verts, Vec2 center);

  RigidPose reference_pose() const {
    RigidPose p;
    p.xc = reference_center;
    return p;
  }
};

/// Signed distance to the body boundary, negative inside.
Scalar signed_distance(const ShapeSpec& shape, const RigidPose& pose, const Vec2& x);
/// Signed distance in the reference frame (point relative to the centre).
Scalar reference_signed_distance(const ShapeSpec& shape, const Vec2& q);

/// Indicator, density and dielectric fields of the current configuration.
struct PhaseMap {
  ScalarField phi;        ///< signed distance at cell centres
  ScalarField chi;        ///< body indicator in [0, 1]
  ScalarField fluid;      ///< 1 where the cell centre lies in the fluid, else 0
  ScalarField mu;         ///< cell density
  ScalarField kappa;      ///< cell dielectric coefficient
  FaceField kappa_face;   ///< harmonic face averages (wall faces: adjacent cell)
  FaceField mu_face;      ///< arithmetic face averages of mu
  FaceField body_face;    ///< 1 where the face centre lies strictly inside the body
  Scalar kappa1 = 1, kappa2 = 1, mu_p = 1, mu_f = 1;
};

PhaseMap build_phase_map(const RigidPose& pose, const ShapeSpec& shape, const Grid& grid,
                         Scalar kappa1, Scalar kappa2, Scalar mu_p, Scalar mu_f);

/// Distance from the body to the enclosure boundary; negative once the body
/// crosses a wall.
Scalar gap_to_wall(const RigidPose& pose, const ShapeSpec& shape, const Grid& grid);

/// Fixed charge carried rigidly with the body: rho(x) = rho0(Q^T (x - x_c) + x_c(0)),
/// sampled by bilinear interpolation of the reference field.
ScalarField transport_fixed_charge(const ScalarField& rho0, const ShapeSpec& shape,
                                   const RigidPose& pose, const Grid& grid);

/// v_c + w x (x - x_c) on every MAC face, walls included.
MacVelocity rigid_velocity_field(const RigidPose& pose, const Grid& grid);

/// Lagrangian update of the pose with frozen velocities.
RigidPose advance_pose(const RigidPose& pose, Scalar dt);

/// Area of the body from its exact geometry.
Scalar shape_area(const ShapeSpec& shape);

}  // namespace ekflow

#endif  // EKFLOW_GEOMETRY_HPP
