#ifndef EKFLOW_ORACLE_HPP
#define EKFLOW_ORACLE_HPP

#include "ekflow/poisson.hpp"
#include "ekflow/types.hpp"

#include <vector>

namespace ekflow::oracle {

/// Far-field data of the oracle: psi -> offset - E0 . (x - ref) away from
/// the particle (plus the free-space potential of the charges).
struct AppliedField {
  Vec2 E0 = Vec2::Zero();
  Scalar offset = 0;
  Vec2 ref = Vec2::Zero();
};

/// Mean of log|y| over the unit square centred at the origin.
inline constexpr Scalar kLogUnitSquareMean = -1.0611754268825244;

/// Reference solution of the two-phase transmission problem for a disk
/// (kappa1 inside, kappa2 outside) in the unbounded plane.
///
/// In phase k the potential is psi = omega / kappa_k + H_k, where omega
/// is the free-space potential of the charges (direct summation against the
/// logarithmic kernel), and the harmonic corrections inside the disk and in
/// its exterior are Fourier series whose modes are fixed by continuity of the
/// potential and of the normal flux on the circle.
class DiskTransmissionOracle {
 public:
  /// `charge` is f in div(kappa grad psi) = -4 pi f, sampled on `grid`; it
  /// must vanish near the circle for the series to converge.
  DiskTransmissionOracle(const Grid& grid, const ScalarField& charge, Vec2 center, Scalar radius,
                         Scalar kappa1, Scalar kappa2, AppliedField far = {}, int modes = 128,
                         int samples = 512);

  Scalar potential(const Vec2& x) const;
  ScalarField on_grid(const Grid& grid) const;
  /// Oracle values on the boundary faces, for use as Dirichlet data.
  ElectrostaticBC boundary(const Grid& grid) const;

  int modes() const { return static_cast<int>(a_cos_.size()); }

 private:
  Scalar omega(const Vec2& x) const;

  struct PointCharge {
    Vec2 x;
    Scalar q;
  };
  std::vector<PointCharge> charges_;
  Scalar h_ = 0;
  Vec2 c_;
  Scalar a_, k1_, k2_;
  AppliedField far_;
  Scalar a0_ = 0;
  std::vector<Scalar> a_cos_, a_sin_, b_cos_, b_sin_;  // index m-1
};

/// Convenience wrapper returning the oracle sampled at cell centres.
ScalarField oracle_decomposition_disk(const Grid& grid, const ScalarField& charge, Vec2 center,
                                      Scalar radius, Scalar kappa1, Scalar kappa2,
                                      AppliedField far = {});

}  // namespace ekflow::oracle

#endif  // EKFLOW_ORACLE_HPP
