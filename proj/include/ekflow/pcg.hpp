#ifndef EKFLOW_PCG_HPP
#define EKFLOW_PCG_HPP

#include "ekflow/types.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <memory>
#include <vector>

namespace ekflow {

using SparseMatrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

struct PcgResult {
  int iterations = 0;
  Scalar residual = 0;
  std::vector<Scalar> history;  ///< residual norm per iteration (stopping norm)
  bool converged = false;
};

/// Stopping rule for pcg(): either a relative 2-norm criterion
/// ||r|| <= rel_tol * ||b|| or an absolute max-norm ||r||_inf <= abs_tol.
struct PcgControl {
  Scalar rel_tol = 1e-10;
  Scalar abs_tol = 0;  ///< when > 0 the max-norm rule is used instead
  int max_iter = 5000;
};

/// Preconditioned conjugate gradients on x (used as the initial guess).
/// `apply(in, out)` computes out = A in; `precond.solve(r)` returns M^{-1} r.
template <typename ApplyOp, typename Precond>
PcgResult pcg(const ApplyOp& apply, const Precond& precond, const Vector& b, Vector& x,
              const PcgControl& ctl) {
  PcgResult res;
  const bool max_norm = ctl.abs_tol > 0;
  auto norm = [&](const Vector& r) { return max_norm ? r.lpNorm<Eigen::Infinity>() : r.norm(); };
  const Scalar target = max_norm ? ctl.abs_tol : ctl.rel_tol * b.norm();

  Vector r(b.size()), ax(b.size());
  apply(x, ax);
  r = b - ax;
  Scalar rn = norm(r);
  res.history.push_back(rn);
  if (rn <= target) {
    res.residual = rn;
    res.converged = true;
    return res;
  }
  Vector z = precond.solve(r);
  Vector p = z;
  Vector ap(b.size());
  Scalar rz = r.dot(z);
  for (int k = 0; k < ctl.max_iter; ++k) {
    apply(p, ap);
    const Scalar pap = p.dot(ap);
    if (!(pap > 0)) break;
    const Scalar alpha = rz / pap;
    x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    rn = norm(r);
    res.iterations = k + 1;
    res.history.push_back(rn);
    if (rn <= target) {
      res.residual = rn;
      res.converged = true;
      return res;
    }
    z = precond.solve(r);
    const Scalar rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  res.residual = rn;
  return res;
}

/// Jacobi preconditioner with the Eigen-style solve() interface.
struct DiagonalPreconditioner {
  Vector inv_diag;
  explicit DiagonalPreconditioner(const Vector& diag) : inv_diag(diag.cwiseInverse()) {}
  Vector solve(const Vector& r) const { return inv_diag.cwiseProduct(r); }
};


/// Sparse Cholesky factor of an SPD matrix used as a PCG preconditioner
/// (the iteration then only has to absorb low-rank terms and roundoff).
class FactorPreconditioner {
 public:
  using Factor = Eigen::SimplicialLDLT<SparseMatrix>;
  /// Factor of A, reused when A is bit-identical to a recently factored
  /// matrix. Returns null if A is not numerically positive definite.
  static std::shared_ptr<const FactorPreconditioner> of(const SparseMatrix& A);

  Vector solve(const Vector& r) const { return factor_.solve(r); }

 private:
  Factor factor_;
};

}  // namespace ekflow

#endif  // EKFLOW_PCG_HPP
