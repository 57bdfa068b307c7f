// Hand-rolled generators and small helpers shared by the unit tests.
#ifndef EKFLOW_TEST_SUPPORT_HPP
#define EKFLOW_TEST_SUPPORT_HPP

#include "ekflow/fluid.hpp"
#include "ekflow/geometry.hpp"
#include "ekflow/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace ekflow::test {

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  Scalar uniform(Scalar lo, Scalar hi) { return std::uniform_real_distribution<Scalar>(lo, hi)(rng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  ScalarField field(int nx, int ny, Scalar lo, Scalar hi) {
    ScalarField f(nx, ny);
    for (Eigen::Index k = 0; k < f.size(); ++k) f(k) = uniform(lo, hi);
    return f;
  }
  MacVelocity mac(const Grid& g, Scalar amp) {
    MacVelocity m = MacVelocity::zeros(g);
    for (int j = 0; j < g.ny; ++j)
      for (int i = 1; i < g.nx; ++i) m.u(i, j) = uniform(-amp, amp);
    for (int j = 1; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) m.v(i, j) = uniform(-amp, amp);
    return m;
  }
  // Pose whose disk of radius r stays at least `margin` inside the unit box.
  RigidPose pose_in_box(Scalar r, Scalar margin) {
    RigidPose p;
    p.xc = Vec2(uniform(r + margin, 1 - r - margin), uniform(r + margin, 1 - r - margin));
    p.theta = uniform(-M_PI, M_PI);
    p.vc = Vec2(uniform(-1, 1), uniform(-1, 1));
    p.w = uniform(-3, 3);
    return p;
  }
};

inline Scalar max_abs(const MacVelocity& m) { return std::max(m.u.abs().maxCoeff(), m.v.abs().maxCoeff()); }

// Plain h^2-weighted inner product over all faces.
inline Scalar dot(const MacVelocity& a, const MacVelocity& b) { return (a.u * b.u).sum() + (a.v * b.v).sum(); }

inline Grid unit_grid(int n) { return Grid(n, n, 1.0 / n); }

}  // namespace ekflow::test

#endif
