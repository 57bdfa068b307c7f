#ifndef EKFLOW_POISSON_HPP
#define EKFLOW_POISSON_HPP

#include "ekflow/geometry.hpp"
#include "ekflow/pcg.hpp"
#include "ekflow/types.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <functional>
#include <memory>
#include <vector>

namespace ekflow {

/// Dirichlet potential on the enclosure boundary, sampled at the centres of
/// the boundary faces.
struct ElectrostaticBC {
  Eigen::ArrayXd left, right;   // size ny, at x = x_min / x_max
  Eigen::ArrayXd bottom, top;   // size nx, at y = y_min / y_max

  static ElectrostaticBC constant(const Grid& g, Scalar value);
  /// Uniform applied field E0: Psi(x) = offset - E0 . (x - ref).
  static ElectrostaticBC uniform_field(const Grid& g, const Vec2& E0, Scalar offset = 0,
                                       const Vec2& ref = Vec2::Zero());
  static ElectrostaticBC from_function(const Grid& g, const std::function<Scalar(const Vec2&)>& f);

  Scalar min() const;
  Scalar max() const;
};

/// e * sum_i Z_i N_i on fluid cells plus the fixed charge.
ScalarField charge_density(const std::vector<ScalarField>& N, const std::vector<SpeciesParams>& species,
                           const ScalarField& rho, const ScalarField& chi_fluid, Scalar e_charge);

/// Right-hand side of div(kappa grad psi) = -4 pi e sum Z_i N_i - 4 pi rho.
ScalarField assemble_rhs(const std::vector<ScalarField>& N, const std::vector<SpeciesParams>& species,
                         const ScalarField& rho, const ScalarField& chi_fluid, Scalar e_charge);

/// Five-point discretisation of -div(kappa grad .) scaled by h^2, with the
/// Dirichlet boundary folded into the right-hand side. Built once per
/// geometry and reused across solves.
class PoissonOperator {
 public:
  PoissonOperator(const Grid& grid, const FaceField& kappa_face);

  const Grid& grid() const { return grid_; }
  const SparseMatrix& matrix() const { return A_; }

  /// Solve with relative residual tolerance tol; `guess` seeds the iteration.
  ScalarField solve(const ScalarField& rhs, const ElectrostaticBC& bc, Scalar tol,
                    const ScalarField* guess = nullptr, PcgResult* info = nullptr) const;

  /// Discrete div(kappa grad psi) with the given boundary data (the operator
  /// the solve inverts).
  ScalarField apply(const ScalarField& psi, const ElectrostaticBC& bc) const;

 private:
  Vector boundary_vector(const ElectrostaticBC& bc) const;

  Grid grid_;
  FaceField kappa_face_;
  SparseMatrix A_;
  std::shared_ptr<const FactorPreconditioner> factor_;
  std::shared_ptr<Eigen::IncompleteCholesky<Scalar, Eigen::Lower, Eigen::AMDOrdering<int>>> ic_;  // fallback
};

ScalarField solve_poisson(const Grid& grid, const FaceField& kappa_face, const ScalarField& rhs,
                          const ElectrostaticBC& bc, Scalar tol = 1e-10);

/// Gradient of psi at cell centres (centred inside, second-order one-sided
/// on boundary cells).
VectorField electric_field(const ScalarField& psi, const Grid& grid);

/// (kappa2 / 4 pi)(d_i psi d_j psi - 1/2 delta_ij |grad psi|^2) per cell.
TensorField maxwell_stress(const VectorField& grad_psi, Scalar kappa2);

/// 1/2 int kappa |grad psi|^2 - 4 pi int (e sum Z_i N_i + rho) psi, with the
/// gradient quadrature taken on faces so the discrete solution is its exact
/// minimiser among fields sharing the boundary trace.
Scalar electrostatic_energy(const ScalarField& psi, const Grid& grid, const FaceField& kappa_face,
                            const ScalarField& charge, const ElectrostaticBC& bc);

}  // namespace ekflow

#endif  // EKFLOW_POISSON_HPP
