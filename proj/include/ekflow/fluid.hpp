#ifndef EKFLOW_FLUID_HPP
#define EKFLOW_FLUID_HPP

#include "ekflow/geometry.hpp"
#include "ekflow/pcg.hpp"
#include "ekflow/types.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <memory>
#include <vector>

namespace ekflow {

using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

// --- MAC grid operators --------------------------------------------------

/// Cell divergence (u_E - u_W + v_N - v_S) / h.
ScalarField divergence(const MacVelocity& u, const Grid& grid);

/// Strain-rate tensor D(u) at cell centres. Shear is averaged from the four
/// cell corners; corners on a wall use the no-slip ghost value.
TensorField cell_strain(const MacVelocity& u, const Grid& grid);
/// sqrt(D:D) per cell.
ScalarField strain_magnitude(const TensorField& D);

/// Component-wise five-point Laplacian on interior faces (wall faces return 0).
MacVelocity vector_laplacian(const MacVelocity& u, const Grid& grid);

/// Divergence-form central advection div(a (x) u) on interior faces. For a
/// discretely divergence-free `a` the operator is skew: <u, A(a) u> = 0.
MacVelocity advection_term(const MacVelocity& a, const MacVelocity& u, const Grid& grid);

/// Averages a cell-centred vector field onto interior faces; wall faces are 0.
FaceField cell_to_faces(const VectorField& f, const Grid& grid);

// --- forcing -------------------------------------------------------------

/// F = -e sum_i Z_i N_i grad psi on fluid cells, 0 elsewhere.
VectorField electric_force_density(const std::vector<ScalarField>& N, const VectorField& grad_psi,
                                   const std::vector<SpeciesParams>& species,
                                   const ScalarField& fluid, Scalar e_charge);

/// Explicit momentum update u* = u + dt [ -A(a) u + (eta / mu) lap u + f / mu ]
/// on interior faces, with `advecting` the frozen transport velocity a and
/// `force` a force per unit volume on faces.
MacVelocity advect_diffuse(const MacVelocity& u, const MacVelocity& advecting, const FaceField& mu_face,
                           const FaceField& force, Scalar eta, Scalar dt, const Grid& grid);

// --- projections ---------------------------------------------------------

struct BodyInertia {
  Scalar M = 0;          ///< mass
  Scalar A = 0;          ///< moment of inertia about x_c
  Mat3 matrix = Mat3::Zero();  ///< full discrete inertia on (v_x, v_y, w)
};

struct ProjectionResult {
  MacVelocity u;
  ScalarField pressure;  ///< Lagrange multiplier, scaled by 1/dt
  Vec3 rigid = Vec3::Zero();  ///< (v_cx, v_cy, w) of the body faces
  PcgResult info;
};

/// Density-weighted projection onto discretely divergence-free MAC fields
/// that, on the faces inside the body, coincide with a rigid motion about
/// the pose centre. With no body faces it is the plain pressure projection.
///
/// Minimises sum_f mu_f |u_f - u*_f|^2 subject to div u = 0; the rigid
/// degrees of freedom enter the pressure system through a rank-three term
/// B J^{-1} B^T, J being the body inertia on its faces.
class RigidFluidProjector {
 public:
  RigidFluidProjector(const Grid& grid, const FaceField& mu_face, const FaceField& body_face,
                      const Vec2& center);

  /// Projects u*; iterates until max |div u| <= div_tol.
  ProjectionResult project(const MacVelocity& u_star, Scalar div_tol, Scalar dt = 1) const;

  /// Momentum-equivalent rigid motion of u on the body faces.
  Vec3 rigid_fit(const MacVelocity& u) const;
  /// u restricted to the body faces replaced by rigid motion V.
  void write_rigid(MacVelocity& u, const Vec3& V) const;
  /// Adds dt J^{-1} (F, T) as a rigid velocity increment on the body faces.
  void add_rigid_impulse(MacVelocity& u, const Vec2& force, Scalar torque, Scalar dt) const;

  bool has_body() const { return n_body_faces_ > 0; }
  BodyInertia inertia() const;

 private:
  Grid grid_;
  FaceField mu_face_, body_face_;
  Vec2 center_;
  int n_body_faces_ = 0;
  Mat3 J_ = Mat3::Zero(), Jinv_ = Mat3::Zero();
  Eigen::ArrayXi cell_index_;   // unknown index per cell, -1 when excluded
  int n_unknowns_ = 0;
  int pinned_ = -1;
  SparseMatrix A_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 3> B_;
  std::shared_ptr<const FactorPreconditioner> factor_;
  std::shared_ptr<Eigen::IncompleteCholesky<Scalar, Eigen::Lower, Eigen::AMDOrdering<int>>> ic_;  // fallback
};

/// Plain projection (uniform density unless mu_face is given); returns the
/// divergence-free field and the pressure multiplier.
ProjectionResult project_incompressible(const MacVelocity& u_star, const Grid& grid, Scalar tol,
                                        const FaceField* mu_face = nullptr, Scalar dt = 1);

BodyInertia body_inertia(const PhaseMap& phase, const RigidPose& pose, const Grid& grid);

struct RigidityResult {
  MacVelocity u;
  RigidPose pose;  ///< input pose with v_c and w replaced by the fitted motion
};

/// Overwrites the body faces with the rigid motion carrying the same linear
/// and angular momentum. In 2D the gyroscopic term w x (A w) vanishes.
RigidityResult enforce_rigidity(const MacVelocity& u, const PhaseMap& phase, const RigidPose& pose,
                                const Grid& grid);

// --- surface loads -------------------------------------------------------

struct ForceTorque {
  Vec2 force = Vec2::Zero();
  Scalar torque = 0;
};

/// Smooth cut-off equal to 1 up to 1.5 h outside the body and 0 beyond 3.5 h.
ScalarField shell_weight(const PhaseMap& phase, const Grid& grid);

/// Load of a stress field on the body boundary, as the volume integral
/// -int_fluid (sigma grad g + g div sigma) over the shell weight g.
ForceTorque shell_traction(const TensorField& sigma, const VectorField& div_sigma, const PhaseMap& phase,
                           const RigidPose& pose, const Grid& grid);

/// Electric load int sigma_E nu ds on the body, with sigma_E the fluid-side
/// Maxwell stress and `ion_force` its divergence in the fluid.
ForceTorque electric_traction(const VectorField& grad_psi, const VectorField& ion_force,
                              const PhaseMap& phase, const RigidPose& pose, Scalar kappa2,
                              const Grid& grid);

struct SurfaceLoads {
  ForceTorque hydro;
  ForceTorque electric;
  ForceTorque total() const {
    return {hydro.force + electric.force, hydro.torque + electric.torque};
  }
};

/// Diagnostic surface integrals of sigma_H = 2 eta D(u) - p I and sigma_E.
SurfaceLoads surface_force_torque(const VectorField& grad_psi, const VectorField& ion_force,
                                  const MacVelocity& u, const ScalarField& p, const PhaseMap& phase,
                                  const RigidPose& pose, Scalar eta, Scalar kappa2, const Grid& grid);

}  // namespace ekflow

#endif  // EKFLOW_FLUID_HPP
