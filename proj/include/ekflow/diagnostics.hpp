#ifndef EKFLOW_DIAGNOSTICS_HPP
#define EKFLOW_DIAGNOSTICS_HPP

#include "ekflow/geometry.hpp"
#include "ekflow/types.hpp"

#include <vector>

namespace ekflow {

/// 1/2 sum mu_f u_f^2 h^2 over MAC faces; faces on the enclosure wall carry
/// half weight, so a constant field on a full-width face row integrates exactly.
Scalar kinetic_energy(const MacVelocity& u, const FaceField& mu_face, const Grid& grid);

/// 2 eta int D(u):D(u) over the fluid, cells weighted by 1 - chi.
Scalar dissipation_rate(const MacVelocity& u, const PhaseMap& phase, Scalar eta, const Grid& grid);

/// eta int |grad u|^2 over the whole enclosure with the no-slip ghost values;
/// equals -eta <u, lap u> for the discrete Laplacian of the momentum update.
Scalar dirichlet_dissipation_rate(const MacVelocity& u, Scalar eta, const Grid& grid);

/// sum f . u h^2 over interior faces; `force` is a force per unit volume.
Scalar electric_power(const FaceField& force, const MacVelocity& u, const Grid& grid);

/// Running energy balance of a simulation. E_d and E_p are accumulated over
/// the steps, E_k and E_el are sampled at the recorded times.
struct EnergyLedger {
  std::vector<Scalar> t, E_k, E_d, E_p, E_el, E_d_strain, residual;

  void start(Scalar t0, Scalar ek, Scalar eel);
  /// Appends the state after a step with the dissipation and work it spent.
  void record(Scalar t1, Scalar ek, Scalar dissipated, Scalar work, Scalar eel, Scalar dissipated_strain = 0);
  std::size_t steps() const { return t.empty() ? 0 : t.size() - 1; }
};

/// Delta E_k + dissipation - work of step `step` (1-based; 0 gives 0), formed
/// from the increments of that step alone.
Scalar energy_residual(const EnergyLedger& ledger, std::size_t step);

}  // namespace ekflow

#endif  // EKFLOW_DIAGNOSTICS_HPP
