#include "ekflow/oracle.hpp"

#include <cmath>

namespace ekflow::oracle {

DiskTransmissionOracle::DiskTransmissionOracle(const Grid& grid, const ScalarField& charge, Vec2 center,
                                               Scalar radius, Scalar kappa1, Scalar kappa2,
                                               AppliedField far, int modes, int samples)
    : h_(grid.h), c_(center), a_(radius), k1_(kappa1), k2_(kappa2), far_(far) {
  if (radius <= 0 || kappa1 <= 0 || kappa2 <= 0) throw OracleError("invalid disk oracle parameters");
  if (samples < 2 * modes + 2) throw OracleError("too few boundary samples for the requested modes");
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (charge(i, j) != 0) charges_.push_back({grid.cell_center(i, j), charge(i, j) * grid.cell_area()});

  // Fourier coefficients of omega on the circle.
  const Scalar jump = 1 / k2_ - 1 / k1_;
  std::vector<Scalar> w(samples);
  for (int k = 0; k < samples; ++k) {
    const Scalar t = 2 * M_PI * k / samples;
    w[k] = omega(c_ + a_ * Vec2(std::cos(t), std::sin(t)));
  }
  Scalar g0 = 0;
  for (Scalar v : w) g0 += v;
  g0 = jump * g0 / samples;

  std::vector<Scalar> gc(modes), gs(modes);
  Scalar gmax = std::abs(g0);
  for (int m = 1; m <= modes; ++m) {
    Scalar sc = 0, ss = 0;
    for (int k = 0; k < samples; ++k) {
      const Scalar t = 2 * M_PI * k * m / samples;
      sc += w[k] * std::cos(t);
      ss += w[k] * std::sin(t);
    }
    gc[m - 1] = jump * 2 * sc / samples;
    gs[m - 1] = jump * 2 * ss / samples;
    gmax = std::max({gmax, std::abs(gc[m - 1]), std::abs(gs[m - 1])});
  }
  Scalar tail = 0;
  for (int m = std::max(1, modes - 4); m <= modes; ++m)
    tail = std::max({tail, std::abs(gc[m - 1]), std::abs(gs[m - 1])});
  if (gmax > 0 && tail > 1e-10 * gmax)
    throw OracleError("interface series did not converge (charges too close to the circle?)");

  // Far-field modes on the circle: G = G0 - a E0.(cos, sin) (r/a).
  const Scalar G0 = far_.offset - far_.E0.dot(c_ - far_.ref);
  a0_ = g0 + G0;
  a_cos_.assign(modes, 0);
  a_sin_.assign(modes, 0);
  b_cos_.assign(modes, 0);
  b_sin_.assign(modes, 0);
  for (int m = 1; m <= modes; ++m) {
    const Scalar Gc = m == 1 ? -a_ * far_.E0.x() : 0;
    const Scalar Gs = m == 1 ? -a_ * far_.E0.y() : 0;
    b_cos_[m - 1] = ((k2_ - k1_) * Gc - k1_ * gc[m - 1]) / (k1_ + k2_);
    b_sin_[m - 1] = ((k2_ - k1_) * Gs - k1_ * gs[m - 1]) / (k1_ + k2_);
    a_cos_[m - 1] = gc[m - 1] + Gc + b_cos_[m - 1];
    a_sin_[m - 1] = gs[m - 1] + Gs + b_sin_[m - 1];
  }
}

Scalar DiskTransmissionOracle::omega(const Vec2& x) const {
  const Scalar self = std::log(h_) + kLogUnitSquareMean;
  Scalar s = 0;
  for (const auto& pc : charges_) {
    const Scalar r2 = (x - pc.x).squaredNorm();
    // a point landing on a charge sample takes the cell-averaged kernel
    s += pc.q * (r2 < 1e-24 * h_ * h_ ? self : std::log(r2) / 2);
  }
  return -2 * s;
}

Scalar DiskTransmissionOracle::potential(const Vec2& x) const {
  const Vec2 d = x - c_;
  const Scalar r = d.norm();
  const Scalar t = std::atan2(d.y(), d.x());
  const Scalar om = omega(x);
  Scalar sum = 0;
  if (r < a_) {
    const Scalar rho = r / a_;
    Scalar rm = 1;
    for (int m = 1; m <= modes(); ++m) {
      rm *= rho;
      if (rm < 1e-300) break;
      sum += rm * (a_cos_[m - 1] * std::cos(m * t) + a_sin_[m - 1] * std::sin(m * t));
    }
    return om / k1_ + a0_ + sum;
  }
  const Scalar rho = a_ / r;
  Scalar rm = 1;
  for (int m = 1; m <= modes(); ++m) {
    rm *= rho;
    if (rm < 1e-300) break;
    sum += rm * (b_cos_[m - 1] * std::cos(m * t) + b_sin_[m - 1] * std::sin(m * t));
  }
  return om / k2_ + far_.offset - far_.E0.dot(x - far_.ref) + sum;
}

ScalarField DiskTransmissionOracle::on_grid(const Grid& grid) const {
  ScalarField out(grid.nx, grid.ny);
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) out(i, j) = potential(grid.cell_center(i, j));
  return out;
}

ElectrostaticBC DiskTransmissionOracle::boundary(const Grid& grid) const {
  return ElectrostaticBC::from_function(grid, [this](const Vec2& x) { return potential(x); });
}

ScalarField oracle_decomposition_disk(const Grid& grid, const ScalarField& charge, Vec2 center,
                                      Scalar radius, Scalar kappa1, Scalar kappa2, AppliedField far) {
  return DiskTransmissionOracle(grid, charge, center, radius, kappa1, kappa2, far).on_grid(grid);
}

}  // namespace ekflow::oracle
