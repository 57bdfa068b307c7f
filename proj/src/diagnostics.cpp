#include "ekflow/diagnostics.hpp"

#include "ekflow/fluid.hpp"

namespace ekflow {

Scalar kinetic_energy(const MacVelocity& u, const FaceField& mu_face, const Grid& grid) {
  const int nx = grid.nx, ny = grid.ny;
  const ScalarField eu = mu_face.u * u.u.square();
  const ScalarField ev = mu_face.v * u.v.square();
  const Scalar inner = eu.middleRows(1, nx - 1).sum() + ev.middleCols(1, ny - 1).sum();
  const Scalar wall = (eu.row(0).sum() + eu.row(nx).sum() + ev.col(0).sum() + ev.col(ny).sum()) / 2;
  return (inner + wall) * grid.cell_area() / 2;
}

Scalar dissipation_rate(const MacVelocity& u, const PhaseMap& phase, Scalar eta, const Grid& grid) {
  const TensorField D = cell_strain(u, grid);
  const ScalarField dd = D.xx.square() + D.yy.square() + 2 * D.xy.square();
  return 2 * eta * (dd * (1 - phase.chi)).sum() * grid.cell_area();
}

Scalar dirichlet_dissipation_rate(const MacVelocity& u, Scalar eta, const Grid& grid) {
  const int nx = grid.nx, ny = grid.ny;
  Scalar s = 0;
  // u: differences along x between all neighbouring faces (walls hold 0),
  // along y between rows, plus the two ghost jumps 2u at bottom and top.
  s += (u.u.bottomRows(nx) - u.u.topRows(nx)).square().sum();
  if (ny > 1) s += (u.u.rightCols(ny - 1) - u.u.leftCols(ny - 1)).middleRows(1, nx - 1).square().sum();
  s += 2 * (u.u.col(0).segment(1, nx - 1).square().sum() + u.u.col(ny - 1).segment(1, nx - 1).square().sum());
  s += (u.v.rightCols(ny) - u.v.leftCols(ny)).square().sum();
  if (nx > 1) s += (u.v.bottomRows(nx - 1) - u.v.topRows(nx - 1)).middleCols(1, ny - 1).square().sum();
  s += 2 * (u.v.row(0).segment(1, ny - 1).square().sum() + u.v.row(nx - 1).segment(1, ny - 1).square().sum());
  return eta * s;
}

Scalar electric_power(const FaceField& force, const MacVelocity& u, const Grid& grid) {
  const int nx = grid.nx, ny = grid.ny;
  return ((force.u * u.u).middleRows(1, nx - 1).sum() + (force.v * u.v).middleCols(1, ny - 1).sum()) *
         grid.cell_area();
}

void EnergyLedger::start(Scalar t0, Scalar ek, Scalar eel) {
  t = {t0};
  E_k = {ek};
  E_d = {0};
  E_p = {0};
  E_el = {eel};
  E_d_strain = {0};
  residual = {0};
}

void EnergyLedger::record(Scalar t1, Scalar ek, Scalar dissipated, Scalar work, Scalar eel,
                          Scalar dissipated_strain) {
  if (t.empty()) throw InvariantViolation("energy ledger used before start()");
  residual.push_back((ek - E_k.back()) + dissipated - work);
  t.push_back(t1);
  E_k.push_back(ek);
  E_d.push_back(E_d.back() + dissipated);
  E_p.push_back(E_p.back() + work);
  E_el.push_back(eel);
  E_d_strain.push_back(E_d_strain.back() + dissipated_strain);
}

Scalar energy_residual(const EnergyLedger& ledger, std::size_t step) {
  if (step == 0 || step >= ledger.residual.size()) return 0;
  return ledger.residual[step];
}

}  // namespace ekflow
