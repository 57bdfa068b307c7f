#ifndef EKFLOW_VALIDATION_HPP
#define EKFLOW_VALIDATION_HPP

#include "ekflow/types.hpp"

#include <string>
#include <vector>

namespace ekflow {

struct ValidationCheck {
  std::string name;
  Scalar value = 0;
  Scalar threshold = 0;
  bool passed = false;
  std::string detail;
};

/// Analytic and structural checks of the solvers at small resolution:
/// dielectric disk in a uniform field, charged disk convergence against the
/// transmission oracle, Boltzmann fixed point, projection idempotence and
/// momentum-conserving rigidity.
std::vector<ValidationCheck> run_validation_suite();

std::string validation_json(const std::vector<ValidationCheck>& checks);

/// Interior field of a dielectric disk (kappa1 inside, kappa2 outside) in the
/// applied field E0 on an n x n grid of the unit square, with oracle boundary
/// data. Returns the mean of |grad psi| over cells at least two cells inside.
Scalar dielectric_disk_interior_field(int n, Scalar radius, Scalar kappa1, Scalar kappa2, Scalar E0);

/// L2 error of the discrete potential against the transmission oracle for a
/// compactly supported charge bump inside a disk of radius 0.2, on an n x n grid of the unit square.
Scalar charged_disk_l2_error(int n, Scalar kappa1, Scalar kappa2, Scalar E0);

}  // namespace ekflow

#endif  // EKFLOW_VALIDATION_HPP
