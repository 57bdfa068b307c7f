#include "ekflow/poisson.hpp"

#include <cmath>
#include <string>

namespace ekflow {

ElectrostaticBC ElectrostaticBC::from_function(const Grid& g,
                                               const std::function<Scalar(const Vec2&)>& f) {
  ElectrostaticBC bc;
  bc.left.resize(g.ny);
  bc.right.resize(g.ny);
  bc.bottom.resize(g.nx);
  bc.top.resize(g.nx);
  for (int j = 0; j < g.ny; ++j) {
    bc.left(j) = f({g.x_min(), g.yc(j)});
    bc.right(j) = f({g.x_max(), g.yc(j)});
  }
  for (int i = 0; i < g.nx; ++i) {
    bc.bottom(i) = f({g.xc(i), g.y_min()});
    bc.top(i) = f({g.xc(i), g.y_max()});
  }
  return bc;
}

ElectrostaticBC ElectrostaticBC::constant(const Grid& g, Scalar value) {
  return from_function(g, [value](const Vec2&) { return value; });
}

ElectrostaticBC ElectrostaticBC::uniform_field(const Grid& g, const Vec2& E0, Scalar offset,
                                               const Vec2& ref) {
  return from_function(g, [&](const Vec2& x) { return offset - E0.dot(x - ref); });
}

Scalar ElectrostaticBC::min() const {
  return std::min({left.minCoeff(), right.minCoeff(), bottom.minCoeff(), top.minCoeff()});
}
Scalar ElectrostaticBC::max() const {
  return std::max({left.maxCoeff(), right.maxCoeff(), bottom.maxCoeff(), top.maxCoeff()});
}

ScalarField charge_density(const std::vector<ScalarField>& N, const std::vector<SpeciesParams>& species,
                           const ScalarField& rho, const ScalarField& chi_fluid, Scalar e_charge) {
  if (N.size() != species.size())
    throw InvariantViolation("species count does not match concentration count");
  ScalarField ions = ScalarField::Zero(rho.rows(), rho.cols());
  for (std::size_t s = 0; s < N.size(); ++s) {
    // same roundoff floor as the Nernst-Planck step
    const Scalar floor = -1e-12 * std::max(Scalar(1), N[s].abs().maxCoeff());
    if ((N[s] < floor).any())
      throw InvariantViolation("negative concentration in species " + std::to_string(s));
    ions += Scalar(species[s].Z) * N[s];
  }
  return e_charge * ions * chi_fluid + rho;
}

ScalarField assemble_rhs(const std::vector<ScalarField>& N, const std::vector<SpeciesParams>& species,
                         const ScalarField& rho, const ScalarField& chi_fluid, Scalar e_charge) {
  return -4 * M_PI * charge_density(N, species, rho, chi_fluid, e_charge);
}

PoissonOperator::PoissonOperator(const Grid& grid, const FaceField& kappa_face)
    : grid_(grid), kappa_face_(kappa_face) {
  const int nx = grid.nx, ny = grid.ny;
  auto id = [nx](int i, int j) { return i + nx * j; };
  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(5 * nx * ny);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int c = id(i, j);
      Scalar diag = 0;
      auto link = [&](Scalar k, int ni, int nj) {
        diag += k;
        trip.emplace_back(c, id(ni, nj), -k);
      };
      // west / east / south / north; wall faces sit half a cell away
      if (i > 0) link(kappa_face.u(i, j), i - 1, j); else diag += 2 * kappa_face.u(i, j);
      if (i < nx - 1) link(kappa_face.u(i + 1, j), i + 1, j); else diag += 2 * kappa_face.u(i + 1, j);
      if (j > 0) link(kappa_face.v(i, j), i, j - 1); else diag += 2 * kappa_face.v(i, j);
      if (j < ny - 1) link(kappa_face.v(i, j + 1), i, j + 1); else diag += 2 * kappa_face.v(i, j + 1);
      trip.emplace_back(c, c, diag);
    }
  A_.resize(nx * ny, nx * ny);
  A_.setFromTriplets(trip.begin(), trip.end());
  A_.makeCompressed();
  factor_ = FactorPreconditioner::of(A_);
  if (!factor_) {
    ic_ = std::make_shared<Eigen::IncompleteCholesky<Scalar, Eigen::Lower, Eigen::AMDOrdering<int>>>();
    ic_->compute(A_);
    if (ic_->info() != Eigen::Success) throw SolverError("incomplete Cholesky factorisation failed", {});
  }
}

Vector PoissonOperator::boundary_vector(const ElectrostaticBC& bc) const {
  const int nx = grid_.nx, ny = grid_.ny;
  Vector b = Vector::Zero(nx * ny);
  for (int j = 0; j < ny; ++j) {
    b(nx * j) += 2 * kappa_face_.u(0, j) * bc.left(j);
    b(nx - 1 + nx * j) += 2 * kappa_face_.u(nx, j) * bc.right(j);
  }
  for (int i = 0; i < nx; ++i) {
    b(i) += 2 * kappa_face_.v(i, 0) * bc.bottom(i);
    b(i + nx * (ny - 1)) += 2 * kappa_face_.v(i, ny) * bc.top(i);
  }
  return b;
}

ScalarField PoissonOperator::solve(const ScalarField& rhs, const ElectrostaticBC& bc, Scalar tol,
                                   const ScalarField* guess, PcgResult* info) const {
  const int n = grid_.cells();
  const Scalar h2 = grid_.h * grid_.h;
  Vector b = boundary_vector(bc) - h2 * Eigen::Map<const Vector>(rhs.data(), n);
  ScalarField psi = ScalarField::Zero(grid_.nx, grid_.ny);
  if (b.isZero(0)) {
    if (info) *info = PcgResult{0, 0, {0}, true};
    return psi;
  }
  Vector x = guess ? Vector(Eigen::Map<const Vector>(guess->data(), n)) : Vector::Zero(n);
  auto apply = [this](const Vector& in, Vector& out) { out.noalias() = A_ * in; };
  PcgControl ctl;
  ctl.rel_tol = tol;
  ctl.max_iter = std::max(1000, 4 * (grid_.nx + grid_.ny));
  PcgResult res = factor_ ? pcg(apply, *factor_, b, x, ctl) : pcg(apply, *ic_, b, x, ctl);
  if (!res.converged)
    throw SolverError("Poisson solve did not converge (residual " + std::to_string(res.residual) + ")",
                      res.history);
  if (info) *info = res;
  Eigen::Map<Vector>(psi.data(), n) = x;
  return psi;
}

ScalarField PoissonOperator::apply(const ScalarField& psi, const ElectrostaticBC& bc) const {
  const int n = grid_.cells();
  Vector r = boundary_vector(bc) - A_ * Eigen::Map<const Vector>(psi.data(), n);
  ScalarField out(grid_.nx, grid_.ny);
  Eigen::Map<Vector>(out.data(), n) = r / (grid_.h * grid_.h);
  return out;
}

ScalarField solve_poisson(const Grid& grid, const FaceField& kappa_face, const ScalarField& rhs,
                          const ElectrostaticBC& bc, Scalar tol) {
  if ((kappa_face.u <= 0).any() || (kappa_face.v <= 0).any())
    throw InvariantViolation("dielectric coefficient must be positive on every face");
  return PoissonOperator(grid, kappa_face).solve(rhs, bc, tol);
}

VectorField electric_field(const ScalarField& psi, const Grid& grid) {
  const int nx = grid.nx, ny = grid.ny;
  const Scalar h = grid.h;
  VectorField g = VectorField::zeros(grid);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (i == 0)
        g.x(i, j) = (-3 * psi(0, j) + 4 * psi(1, j) - psi(2, j)) / (2 * h);
      else if (i == nx - 1)
        g.x(i, j) = (3 * psi(i, j) - 4 * psi(i - 1, j) + psi(i - 2, j)) / (2 * h);
      else
        g.x(i, j) = (psi(i + 1, j) - psi(i - 1, j)) / (2 * h);
      if (j == 0)
        g.y(i, j) = (-3 * psi(i, 0) + 4 * psi(i, 1) - psi(i, 2)) / (2 * h);
      else if (j == ny - 1)
        g.y(i, j) = (3 * psi(i, j) - 4 * psi(i, j - 1) + psi(i, j - 2)) / (2 * h);
      else
        g.y(i, j) = (psi(i, j + 1) - psi(i, j - 1)) / (2 * h);
    }
  return g;
}

TensorField maxwell_stress(const VectorField& grad_psi, Scalar kappa2) {
  const Scalar c = kappa2 / (4 * M_PI);
  const ScalarField mag2 = grad_psi.x.square() + grad_psi.y.square();
  return {c * (grad_psi.x.square() - mag2 / 2), c * grad_psi.x * grad_psi.y,
          c * (grad_psi.y.square() - mag2 / 2)};
}

Scalar electrostatic_energy(const ScalarField& psi, const Grid& grid, const FaceField& kappa_face,
                            const ScalarField& charge, const ElectrostaticBC& bc) {
  const int nx = grid.nx, ny = grid.ny;
  Scalar field = 0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 1; i < nx; ++i) field += kappa_face.u(i, j) * std::pow(psi(i, j) - psi(i - 1, j), 2) / 2;
    field += kappa_face.u(0, j) * std::pow(bc.left(j) - psi(0, j), 2);
    field += kappa_face.u(nx, j) * std::pow(bc.right(j) - psi(nx - 1, j), 2);
  }
  for (int i = 0; i < nx; ++i) {
    for (int j = 1; j < ny; ++j) field += kappa_face.v(i, j) * std::pow(psi(i, j) - psi(i, j - 1), 2) / 2;
    field += kappa_face.v(i, 0) * std::pow(bc.bottom(i) - psi(i, 0), 2);
    field += kappa_face.v(i, ny) * std::pow(bc.top(i) - psi(i, ny - 1), 2);
  }
  return field - 4 * M_PI * (charge * psi).sum() * grid.cell_area();
}

}  // namespace ekflow
