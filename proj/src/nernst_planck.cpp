#include "ekflow/nernst_planck.hpp"

#include <cmath>
#include <limits>

namespace ekflow {

namespace {

// Physical flux a N_face - d (N_R - N_L) / h across one face.
inline Scalar face_transport(Scalar a, Scalar nl, Scalar nr, Scalar d, Scalar h) {
  Scalar n_face;
  if (std::abs(a) * h <= 2 * d)
    n_face = (nl + nr) / 2;
  else
    n_face = a > 0 ? nl : nr;
  return a * n_face - d * (nr - nl) / h;
}

}  // namespace

FaceField np_face_fluxes(const ScalarField& N, const MacVelocity& u, const ScalarField& psi,
                         const SpeciesParams& sp, const ScalarField& fluid, Scalar beta,
                         const Grid& grid) {
  const int nx = grid.nx, ny = grid.ny;
  const Scalar h = grid.h;
  const Scalar mobility = sp.d * sp.Z * beta;
  FaceField J = FaceField::zeros(grid);
  for (int j = 0; j < ny; ++j)
    for (int i = 1; i < nx; ++i) {
      if (fluid(i - 1, j) == 0 || fluid(i, j) == 0) continue;
      const Scalar a = u.u(i, j) - mobility * (psi(i, j) - psi(i - 1, j)) / h;
      J.u(i, j) = -face_transport(a, N(i - 1, j), N(i, j), sp.d, h);
    }
  for (int j = 1; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (fluid(i, j - 1) == 0 || fluid(i, j) == 0) continue;
      const Scalar a = u.v(i, j) - mobility * (psi(i, j) - psi(i, j - 1)) / h;
      J.v(i, j) = -face_transport(a, N(i, j - 1), N(i, j), sp.d, h);
    }
  return J;
}

ScalarField step_np(const ScalarField& N, const MacVelocity& u, const ScalarField& psi,
                    const SpeciesParams& sp, const PhaseMap& phase, Scalar dt, Scalar beta,
                    const Grid& grid) {
  const FaceField J = np_face_fluxes(N, u, psi, sp, phase.fluid, beta, grid);
  const Scalar c = dt / grid.h;
  ScalarField out = N;
  Scalar scale = 0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      if (phase.fluid(i, j) == 0) continue;
      out(i, j) = N(i, j) + c * ((J.u(i + 1, j) - J.u(i, j)) + (J.v(i, j + 1) - J.v(i, j)));
      scale = std::max(scale, std::abs(N(i, j)));
    }
  const Scalar floor = -1e-12 * std::max(Scalar(1), scale);
  if (!out.allFinite() || out.minCoeff() < floor)
    throw StabilityError("Nernst-Planck step produced a negative concentration (dt too large)");
  return out;
}

Scalar np_stable_dt(const MacVelocity& u, const ScalarField& psi, const SpeciesParams& sp,
                    Scalar beta, const Grid& grid, Scalar safety) {
  const Scalar h = grid.h;
  Scalar gmax = 0;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 1; i < grid.nx; ++i) gmax = std::max(gmax, std::abs(psi(i, j) - psi(i - 1, j)) / h);
  for (int j = 1; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) gmax = std::max(gmax, std::abs(psi(i, j) - psi(i, j - 1)) / h);
  const Scalar umax = std::max(u.u.abs().maxCoeff(), u.v.abs().maxCoeff());
  const Scalar amax = umax + sp.d * std::abs(sp.Z) * beta * gmax;
  return safety / (4 * sp.d / (h * h) + 4 * amax / h);
}

Scalar total_moles(const ScalarField& N, const PhaseMap& phase, const Grid& grid) {
  return (N * phase.fluid).sum() * grid.cell_area();
}

ScalarField boltzmann_profile(const ScalarField& psi, const SpeciesParams& sp, Scalar target_moles,
                              const PhaseMap& phase, Scalar beta, const Grid& grid) {
  if (target_moles < 0) throw InvariantViolation("target moles must be non-negative");
  const ScalarField expo = -Scalar(sp.Z) * beta * psi;
  Scalar emax = -std::numeric_limits<Scalar>::infinity();
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (phase.fluid(i, j) != 0) emax = std::max(emax, expo(i, j));
  ScalarField N = ((expo - emax).exp()) * phase.fluid;
  const Scalar m = total_moles(N, phase, grid);
  if (m > 0) N *= target_moles / m;
  return N;
}

void redistribute_covered(ScalarField& N, const PhaseMap& old_phase, const PhaseMap& new_phase) {
  const int nx = static_cast<int>(N.rows()), ny = static_cast<int>(N.cols());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      if (new_phase.fluid(i, j) != 0) continue;
      if (old_phase.fluid(i, j) == 0 || N(i, j) == 0) {
        N(i, j) = 0;
        continue;
      }
      // Receiver: the fluid cell with the largest clearance in growing rings.
      int bi = -1, bj = -1;
      for (int ring = 1; ring <= std::max(nx, ny) && bi < 0; ++ring) {
        Scalar best = -std::numeric_limits<Scalar>::infinity();
        for (int dj = -ring; dj <= ring; ++dj)
          for (int di = -ring; di <= ring; ++di) {
            if (std::max(std::abs(di), std::abs(dj)) != ring) continue;
            const int a = i + di, b = j + dj;
            if (a < 0 || a >= nx || b < 0 || b >= ny || new_phase.fluid(a, b) == 0) continue;
            if (new_phase.phi(a, b) > best) {
              best = new_phase.phi(a, b);
              bi = a;
              bj = b;
            }
          }
      }
      if (bi < 0) throw GeometryError("no fluid cell left to receive covered concentration");
      N(bi, bj) += N(i, j);
      N(i, j) = 0;
    }
}

}  // namespace ekflow
