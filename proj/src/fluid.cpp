#include "ekflow/fluid.hpp"

#include "ekflow/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ekflow {

ScalarField divergence(const MacVelocity& u, const Grid& grid) {
  const int nx = grid.nx, ny = grid.ny;
  return ((u.u.bottomRows(nx) - u.u.topRows(nx)) + (u.v.rightCols(ny) - u.v.leftCols(ny))) / grid.h;
}

TensorField cell_strain(const MacVelocity& u, const Grid& grid) {
  const int nx = grid.nx, ny = grid.ny;
  const Scalar h = grid.h;
  // corner shear 1/2 (du/dy + dv/dx) on the (nx+1) x (ny+1) nodes
  ScalarField shear(nx + 1, ny + 1);
  for (int jn = 0; jn <= ny; ++jn)
    for (int in = 0; in <= nx; ++in) {
      Scalar dudy = 0, dvdx = 0;
      if (in > 0 && in < nx) {
        if (jn == 0) dudy = 2 * u.u(in, 0) / h;
        else if (jn == ny) dudy = -2 * u.u(in, ny - 1) / h;
        else dudy = (u.u(in, jn) - u.u(in, jn - 1)) / h;
      }
      if (jn > 0 && jn < ny) {
        if (in == 0) dvdx = 2 * u.v(0, jn) / h;
        else if (in == nx) dvdx = -2 * u.v(nx - 1, jn) / h;
        else dvdx = (u.v(in, jn) - u.v(in - 1, jn)) / h;
      }
      shear(in, jn) = (dudy + dvdx) / 2;
    }
  TensorField D;
  D.xx = (u.u.bottomRows(nx) - u.u.topRows(nx)) / h;
  D.yy = (u.v.rightCols(ny) - u.v.leftCols(ny)) / h;
  D.xy = (shear.topLeftCorner(nx, ny) + shear.bottomLeftCorner(nx, ny) + shear.topRightCorner(nx, ny) +
          shear.bottomRightCorner(nx, ny)) /
         4;
  return D;
}

ScalarField strain_magnitude(const TensorField& D) {
  return (D.xx.square() + D.yy.square() + 2 * D.xy.square()).sqrt();
}

MacVelocity vector_laplacian(const MacVelocity& m, const Grid& grid) {
  const int nx = grid.nx, ny = grid.ny;
  const Scalar ih2 = 1 / (grid.h * grid.h);
  MacVelocity L = MacVelocity::zeros(grid);
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      const Scalar c = m.u(i, j);
      Scalar s = m.u(i + 1, j) + m.u(i - 1, j) - 2 * c;
      const Scalar below = j > 0 ? m.u(i, j - 1) : -c;  // no-slip ghost
      const Scalar above = j < ny - 1 ? m.u(i, j + 1) : -c;
      s += above + below - 2 * c;
      L.u(i, j) = s * ih2;
    }
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const Scalar c = m.v(i, j);
      Scalar s = m.v(i, j + 1) + m.v(i, j - 1) - 2 * c;
      const Scalar left = i > 0 ? m.v(i - 1, j) : -c;
      const Scalar right = i < nx - 1 ? m.v(i + 1, j) : -c;
      s += left + right - 2 * c;
      L.v(i, j) = s * ih2;
    }
  return L;
}

MacVelocity advection_term(const MacVelocity& a, const MacVelocity& m, const Grid& grid) {
  const int nx = grid.nx, ny = grid.ny;
  const Scalar ih = 1 / grid.h;
  MacVelocity A = MacVelocity::zeros(grid);

  // u momentum: x-fluxes at cell centres, y-fluxes at nodes
  ScalarField fxc(nx, ny), fyn(nx + 1, ny + 1);
  for (int j = 0; j < ny; ++j)
    for (int c = 0; c < nx; ++c)
      fxc(c, j) = (a.u(c, j) + a.u(c + 1, j)) / 2 * ((m.u(c, j) + m.u(c + 1, j)) / 2);
  fyn.setZero();
  for (int jn = 1; jn < ny; ++jn)
    for (int in = 1; in < nx; ++in)
      fyn(in, jn) = (a.v(in - 1, jn) + a.v(in, jn)) / 2 * ((m.u(in, jn - 1) + m.u(in, jn)) / 2);
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      A.u(i, j) = ((fxc(i, j) - fxc(i - 1, j)) + (fyn(i, j + 1) - fyn(i, j))) * ih;

  // v momentum: y-fluxes at cell centres, x-fluxes at nodes
  ScalarField fyc(nx, ny), fxn(nx + 1, ny + 1);
  for (int c = 0; c < ny; ++c)
    for (int i = 0; i < nx; ++i)
      fyc(i, c) = (a.v(i, c) + a.v(i, c + 1)) / 2 * ((m.v(i, c) + m.v(i, c + 1)) / 2);
  fxn.setZero();
  for (int jn = 1; jn < ny; ++jn)
    for (int in = 1; in < nx; ++in)
      fxn(in, jn) = (a.u(in, jn - 1) + a.u(in, jn)) / 2 * ((m.v(in - 1, jn) + m.v(in, jn)) / 2);
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      A.v(i, j) = ((fyc(i, j) - fyc(i, j - 1)) + (fxn(i + 1, j) - fxn(i, j))) * ih;
  return A;
}

FaceField cell_to_faces(const VectorField& f, const Grid& grid) {
  const int nx = grid.nx, ny = grid.ny;
  FaceField out = FaceField::zeros(grid);
  out.u.middleRows(1, nx - 1) = (f.x.topRows(nx - 1) + f.x.bottomRows(nx - 1)) / 2;
  out.v.middleCols(1, ny - 1) = (f.y.leftCols(ny - 1) + f.y.rightCols(ny - 1)) / 2;
  return out;
}

VectorField electric_force_density(const std::vector<ScalarField>& N, const VectorField& grad_psi,
                                   const std::vector<SpeciesParams>& species,
                                   const ScalarField& fluid, Scalar e_charge) {
  ScalarField q = ScalarField::Zero(fluid.rows(), fluid.cols());
  for (std::size_t s = 0; s < N.size(); ++s) q += Scalar(species[s].Z) * N[s];
  q *= -e_charge * fluid;
  return {q * grad_psi.x, q * grad_psi.y};
}

MacVelocity advect_diffuse(const MacVelocity& u, const MacVelocity& advecting, const FaceField& mu_face,
                           const FaceField& force, Scalar eta, Scalar dt, const Grid& grid) {
  const int nx = grid.nx, ny = grid.ny;
  const MacVelocity adv = advection_term(advecting, u, grid);
  const MacVelocity lap = vector_laplacian(u, grid);
  MacVelocity out = u;
  out.u.middleRows(1, nx - 1) +=
      dt * (-adv.u.middleRows(1, nx - 1) +
            (eta * lap.u.middleRows(1, nx - 1) + force.u.middleRows(1, nx - 1)) / mu_face.u.middleRows(1, nx - 1));
  out.v.middleCols(1, ny - 1) +=
      dt * (-adv.v.middleCols(1, ny - 1) +
            (eta * lap.v.middleCols(1, ny - 1) + force.v.middleCols(1, ny - 1)) / mu_face.v.middleCols(1, ny - 1));
  if (!out.u.allFinite() || !out.v.allFinite())
    throw StabilityError("momentum update produced a non-finite velocity");
  return out;
}

// --- projection ------------------------------------------------------------

namespace {

inline Vec3 u_basis(Scalar y, const Vec2& c) { return {1, 0, -(y - c.y())}; }
inline Vec3 v_basis(Scalar x, const Vec2& c) { return {0, 1, x - c.x()}; }


}  // namespace

RigidFluidProjector::RigidFluidProjector(const Grid& grid, const FaceField& mu_face,
                                         const FaceField& body_face, const Vec2& center)
    : grid_(grid), mu_face_(mu_face), body_face_(body_face), center_(center) {
  const int nx = grid.nx, ny = grid.ny;
  // interior faces only; wall faces carry no velocity
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      if (body_face.u(i, j) != 0) {
        const Vec3 r = u_basis(grid.yc(j), center);
        J_ += mu_face.u(i, j) * r * r.transpose();
        ++n_body_faces_;
      }
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (body_face.v(i, j) != 0) {
        const Vec3 r = v_basis(grid.xc(i), center);
        J_ += mu_face.v(i, j) * r * r.transpose();
        ++n_body_faces_;
      }
  if (n_body_faces_ > 0) {
    Jinv_ = J_.ldlt().solve(Mat3::Identity());
    if (!Jinv_.allFinite()) throw GeometryError("body inertia is singular");
  }

  auto is_free_u = [&](int i, int j) { return i > 0 && i < nx && body_face.u(i, j) == 0; };
  auto is_free_v = [&](int i, int j) { return j > 0 && j < ny && body_face.v(i, j) == 0; };

  // Cells bounded only by body and wall faces stay rigid and drop out.
  cell_index_ = Eigen::ArrayXi::Constant(nx * ny, -1);
  Scalar best = -1;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (is_free_u(i, j) || is_free_u(i + 1, j) || is_free_v(i, j) || is_free_v(i, j + 1)) {
        cell_index_(i + nx * j) = n_unknowns_++;
        // pin the cell farthest from the body (any cell without a body)
        Scalar clearance = std::min({Scalar(i), Scalar(j)});
        if (n_body_faces_ > 0) {
          const Vec2 d = grid.cell_center(i, j) - center;
          clearance = d.norm();
        }
        if (clearance > best || pinned_ < 0) {
          if (n_body_faces_ > 0 || pinned_ < 0) {
            best = clearance;
            pinned_ = cell_index_(i + nx * j);
          }
        }
      }
    }
  if (n_unknowns_ == 0) throw GeometryError("no fluid cells left for the pressure projection");

  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(5 * n_unknowns_);
  B_ = Eigen::Matrix<Scalar, Eigen::Dynamic, 3>::Zero(n_unknowns_, 3);
  auto link = [&](int l, int r, Scalar w) {
    const int a = cell_index_(l), b = cell_index_(r);
    if (a != pinned_) trip.emplace_back(a, a, w);
    if (b != pinned_) trip.emplace_back(b, b, w);
    if (a != pinned_ && b != pinned_) {
      trip.emplace_back(a, b, -w);
      trip.emplace_back(b, a, -w);
    }
  };
  auto body_couple = [&](int l, int r, const Vec3& basis) {
    const int a = cell_index_(l), b = cell_index_(r);
    if (a >= 0 && a != pinned_) B_.row(a) += basis.transpose();
    if (b >= 0 && b != pinned_) B_.row(b) -= basis.transpose();
  };
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      const int l = i - 1 + nx * j, r = i + nx * j;
      if (body_face.u(i, j) == 0) link(l, r, 1 / mu_face.u(i, j));
      else body_couple(l, r, u_basis(grid.yc(j), center));
    }
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int l = i + nx * (j - 1), r = i + nx * j;
      if (body_face.v(i, j) == 0) link(l, r, 1 / mu_face.v(i, j));
      else body_couple(l, r, v_basis(grid.xc(i), center));
    }
  trip.emplace_back(pinned_, pinned_, 1);
  A_.resize(n_unknowns_, n_unknowns_);
  A_.setFromTriplets(trip.begin(), trip.end());
  A_.makeCompressed();

  // The fluid block is factored exactly; CG absorbs the rank-three body term.
  factor_ = FactorPreconditioner::of(A_);
  if (!factor_) {
    SparseMatrix P = A_;
    if (n_body_faces_ > 0) {
      const Vector extra = (B_ * Jinv_).cwiseProduct(B_).rowwise().sum();
      for (int k = 0; k < n_unknowns_; ++k)
        if (extra(k) != 0) P.coeffRef(k, k) += extra(k);
    }
    ic_ = std::make_shared<Eigen::IncompleteCholesky<Scalar, Eigen::Lower, Eigen::AMDOrdering<int>>>();
    ic_->compute(P);
    if (ic_->info() != Eigen::Success) throw SolverError("projection preconditioner failed", {});
  }
}

Vec3 RigidFluidProjector::rigid_fit(const MacVelocity& u) const {
  if (n_body_faces_ == 0) return Vec3::Zero();
  const int nx = grid_.nx, ny = grid_.ny;
  Vec3 m = Vec3::Zero();
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      if (body_face_.u(i, j) != 0) m += mu_face_.u(i, j) * u.u(i, j) * u_basis(grid_.yc(j), center_);
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (body_face_.v(i, j) != 0) m += mu_face_.v(i, j) * u.v(i, j) * v_basis(grid_.xc(i), center_);
  return Jinv_ * m;
}

void RigidFluidProjector::write_rigid(MacVelocity& u, const Vec3& V) const {
  const int nx = grid_.nx, ny = grid_.ny;
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      if (body_face_.u(i, j) != 0) u.u(i, j) = V(0) - V(2) * (grid_.yc(j) - center_.y());
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (body_face_.v(i, j) != 0) u.v(i, j) = V(1) + V(2) * (grid_.xc(i) - center_.x());
}

void RigidFluidProjector::add_rigid_impulse(MacVelocity& u, const Vec2& force, Scalar torque,
                                            Scalar dt) const {
  if (n_body_faces_ == 0) return;
  // J carries no cell area; scale the load accordingly.
  const Vec3 dV = dt * Jinv_ * Vec3(force.x(), force.y(), torque) / grid_.cell_area();
  if (dV.isZero(0)) return;
  const int nx = grid_.nx, ny = grid_.ny;
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i)
      if (body_face_.u(i, j) != 0) u.u(i, j) += dV(0) - dV(2) * (grid_.yc(j) - center_.y());
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (body_face_.v(i, j) != 0) u.v(i, j) += dV(1) + dV(2) * (grid_.xc(i) - center_.x());
}

BodyInertia RigidFluidProjector::inertia() const {
  BodyInertia bi;
  bi.matrix = J_ * grid_.cell_area();
  bi.M = bi.matrix(0, 0);
  bi.A = bi.matrix(2, 2);
  return bi;
}

ProjectionResult RigidFluidProjector::project(const MacVelocity& u_star, Scalar div_tol, Scalar dt) const {
  const int nx = grid_.nx, ny = grid_.ny;
  const Scalar h = grid_.h;
  const Vec3 Vs = rigid_fit(u_star);

  Vector b = Vector::Zero(n_unknowns_);
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      if (body_face_.u(i, j) != 0) continue;
      const int a = cell_index_(i - 1 + nx * j), c = cell_index_(i + nx * j);
      b(a) += u_star.u(i, j);
      b(c) -= u_star.u(i, j);
    }
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (body_face_.v(i, j) != 0) continue;
      const int a = cell_index_(i + nx * (j - 1)), c = cell_index_(i + nx * j);
      b(a) += u_star.v(i, j);
      b(c) -= u_star.v(i, j);
    }
  if (n_body_faces_ > 0) b += B_ * Vs;
  b(pinned_) = 0;

  ProjectionResult res;
  Vector lambda = Vector::Zero(n_unknowns_);
  auto recover = [&] {
    res.u = u_star;
    res.u.u.row(0).setZero();
    res.u.u.row(nx).setZero();
    res.u.v.col(0).setZero();
    res.u.v.col(ny).setZero();
    for (int j = 0; j < ny; ++j)
      for (int i = 1; i < nx; ++i) {
        if (body_face_.u(i, j) != 0) continue;
        const Scalar dl = lambda(cell_index_(i - 1 + nx * j)) - lambda(cell_index_(i + nx * j));
        if (dl != 0) res.u.u(i, j) -= dl / mu_face_.u(i, j);
      }
    for (int j = 1; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        if (body_face_.v(i, j) != 0) continue;
        const Scalar dl = lambda(cell_index_(i + nx * (j - 1))) - lambda(cell_index_(i + nx * j));
        if (dl != 0) res.u.v(i, j) -= dl / mu_face_.v(i, j);
      }
    if (n_body_faces_ > 0) {
      const Vec3 corr = B_.transpose() * lambda;
      res.rigid = corr.isZero(0) ? Vs : Vec3(Vs - Jinv_ * corr);
      write_rigid(res.u, res.rigid);
    }
  };

  if (!b.isZero(0)) {
    auto apply = [this](const Vector& in, Vector& out) {
      out.noalias() = A_ * in;
      if (n_body_faces_ > 0) out.noalias() += B_ * (Jinv_ * (B_.transpose() * in));
    };
    PcgControl ctl;
    ctl.abs_tol = div_tol * h;
    ctl.max_iter = std::max(2000, 10 * (nx + ny));
    // The pinned row is not part of the residual; its divergence is the
    // negative sum of all others, so tighten until the recovered field passes.
    for (int pass = 0;; ++pass) {
      PcgResult r = factor_ ? pcg(apply, *factor_, b, lambda, ctl) : pcg(apply, *ic_, b, lambda, ctl);
      res.info.iterations += r.iterations;
      res.info.history.insert(res.info.history.end(), r.history.begin(), r.history.end());
      res.info.residual = r.residual;
      if (!r.converged)
        throw SolverError("pressure projection did not converge (residual " +
                              std::to_string(r.residual / h) + ")",
                          res.info.history);
      recover();
      const Scalar div_max = divergence(res.u, grid_).abs().maxCoeff();
      if (div_max <= div_tol || pass == 8) {
        res.info.converged = div_max <= div_tol;
        res.info.residual = div_max;
        break;
      }
      ctl.abs_tol /= 16;
    }
    if (!res.info.converged)
      throw SolverError("pressure projection stalled above the divergence tolerance", res.info.history);
  } else {
    recover();
    res.info.converged = true;
    res.info.history = {0};
  }

  res.pressure = ScalarField::Zero(nx, ny);
  for (int k = 0; k < nx * ny; ++k)
    if (cell_index_(k) >= 0 && lambda(cell_index_(k)) != 0)
      res.pressure(k) = -h * lambda(cell_index_(k)) / dt;
  return res;
}

ProjectionResult project_incompressible(const MacVelocity& u_star, const Grid& grid, Scalar tol,
                                        const FaceField* mu_face, Scalar dt) {
  FaceField ones = FaceField::zeros(grid);
  ones.u.setOnes();
  ones.v.setOnes();
  const FaceField none = FaceField::zeros(grid);
  return RigidFluidProjector(grid, mu_face ? *mu_face : ones, none, Vec2::Zero()).project(u_star, tol, dt);
}

BodyInertia body_inertia(const PhaseMap& phase, const RigidPose& pose, const Grid& grid) {
  const RigidFluidProjector proj(grid, phase.mu_face, phase.body_face, pose.xc);
  if (!proj.has_body()) throw GeometryError("body covers no faces of the grid");
  return proj.inertia();
}

RigidityResult enforce_rigidity(const MacVelocity& u, const PhaseMap& phase, const RigidPose& pose,
                                const Grid& grid) {
  const RigidFluidProjector proj(grid, phase.mu_face, phase.body_face, pose.xc);
  if (!proj.has_body()) throw GeometryError("body covers no faces of the grid");
  const Vec3 V = proj.rigid_fit(u);
  RigidityResult r{u, pose};
  proj.write_rigid(r.u, V);
  r.pose.vc = V.head<2>();
  r.pose.w = V(2);
  return r;
}

// --- surface loads -----------------------------------------------------------

ScalarField shell_weight(const PhaseMap& phase, const Grid& grid) {
  const Scalar h = grid.h;
  ScalarField g(grid.nx, grid.ny);
  for (int k = 0; k < g.size(); ++k) {
    const Scalar s = std::clamp((phase.phi(k) - Scalar(1.5) * h) / (2 * h), Scalar(0), Scalar(1));
    g(k) = 1 - s * s * (3 - 2 * s);
  }
  return g;
}

ForceTorque shell_traction(const TensorField& sigma, const VectorField& div_sigma, const PhaseMap& phase,
                           const RigidPose& pose, const Grid& grid) {
  const ScalarField g = shell_weight(phase, grid);
  const int nx = grid.nx, ny = grid.ny;
  const Scalar h = grid.h;
  ForceTorque ft;
  for (int j = 1; j < ny - 1; ++j)
    for (int i = 1; i < nx - 1; ++i) {
      if (phase.fluid(i, j) == 0) continue;
      const Scalar gx = (g(i + 1, j) - g(i - 1, j)) / (2 * h);
      const Scalar gy = (g(i, j + 1) - g(i, j - 1)) / (2 * h);
      const Scalar w = g(i, j);
      if (gx == 0 && gy == 0 && w == 0) continue;
      const Scalar fx = sigma.xx(i, j) * gx + sigma.xy(i, j) * gy + w * div_sigma.x(i, j);
      const Scalar fy = sigma.xy(i, j) * gx + sigma.yy(i, j) * gy + w * div_sigma.y(i, j);
      const Vec2 r = grid.cell_center(i, j) - pose.xc;
      ft.force -= Vec2(fx, fy) * grid.cell_area();
      ft.torque -= (r.x() * fy - r.y() * fx) * grid.cell_area();
    }
  return ft;
}

ForceTorque electric_traction(const VectorField& grad_psi, const VectorField& ion_force,
                              const PhaseMap& phase, const RigidPose& pose, Scalar kappa2,
                              const Grid& grid) {
  return shell_traction(maxwell_stress(grad_psi, kappa2), ion_force, phase, pose, grid);
}

SurfaceLoads surface_force_torque(const VectorField& grad_psi, const VectorField& ion_force,
                                  const MacVelocity& u, const ScalarField& p, const PhaseMap& phase,
                                  const RigidPose& pose, Scalar eta, Scalar kappa2, const Grid& grid) {
  SurfaceLoads loads;
  loads.electric = electric_traction(grad_psi, ion_force, phase, pose, kappa2, grid);

  const TensorField D = cell_strain(u, grid);
  TensorField sh{2 * eta * D.xx - p, 2 * eta * D.xy, 2 * eta * D.yy - p};
  const int nx = grid.nx, ny = grid.ny;
  const Scalar h = grid.h;
  VectorField div = VectorField::zeros(grid);
  for (int j = 1; j < ny - 1; ++j)
    for (int i = 1; i < nx - 1; ++i) {
      div.x(i, j) = (sh.xx(i + 1, j) - sh.xx(i - 1, j) + sh.xy(i, j + 1) - sh.xy(i, j - 1)) / (2 * h);
      div.y(i, j) = (sh.xy(i + 1, j) - sh.xy(i - 1, j) + sh.yy(i, j + 1) - sh.yy(i, j - 1)) / (2 * h);
    }
  loads.hydro = shell_traction(sh, div, phase, pose, grid);
  return loads;
}

}  // namespace ekflow
