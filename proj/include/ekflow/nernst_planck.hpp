#ifndef EKFLOW_NERNST_PLANCK_HPP
#define EKFLOW_NERNST_PLANCK_HPP

#include "ekflow/geometry.hpp"
#include "ekflow/types.hpp"

namespace ekflow {

/// Ionic flux J = -N u + d grad N + (d Z beta) N grad psi on every face,
/// with dN/dt = div J. `beta` is e / (k_B theta). Faces on the enclosure
/// wall or touching a non-fluid cell carry no flux.
///
/// The transported value N_face is centred while the cell Peclet number
/// |a| h / d of the effective velocity a = u - d Z beta grad psi stays <= 2,
/// and upwinded beyond; both branches keep the explicit update monotone.
FaceField np_face_fluxes(const ScalarField& N, const MacVelocity& u, const ScalarField& psi,
                         const SpeciesParams& sp, const ScalarField& fluid, Scalar beta,
                         const Grid& grid);

/// One explicit conservative step on the fluid cells. Throws StabilityError
/// when a concentration drops below -1e-12 (dt too large).
ScalarField step_np(const ScalarField& N, const MacVelocity& u, const ScalarField& psi,
                    const SpeciesParams& sp, const PhaseMap& phase, Scalar dt, Scalar beta,
                    const Grid& grid);

/// safety / (4 d / h^2 + 4 a_max / h), a_max the largest face speed |u| +
/// d |Z| beta |grad psi|. Never exceeds safety * min(h^2 / 4d, h / a_max).
Scalar np_stable_dt(const MacVelocity& u, const ScalarField& psi, const SpeciesParams& sp,
                    Scalar beta, const Grid& grid, Scalar safety = 0.9);

/// Sum over fluid cells of N h^2.
Scalar total_moles(const ScalarField& N, const PhaseMap& phase, const Grid& grid);

/// N proportional to exp(-Z beta psi) on fluid cells, normalised to `target_moles`.
ScalarField boltzmann_profile(const ScalarField& psi, const SpeciesParams& sp, Scalar target_moles,
                              const PhaseMap& phase, Scalar beta, const Grid& grid);

/// Moves the content of cells that the body has just covered onto the
/// nearest fluid cells of the new configuration. Total moles are unchanged
/// up to roundoff.
void redistribute_covered(ScalarField& N, const PhaseMap& old_phase, const PhaseMap& new_phase);

}  // namespace ekflow

#endif  // EKFLOW_NERNST_PLANCK_HPP
