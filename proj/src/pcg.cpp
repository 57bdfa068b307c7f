#include "ekflow/pcg.hpp"

#include <algorithm>
#include <cstring>
#include <deque>

namespace ekflow {

namespace {

bool identical(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros()) return false;
  if (!a.isCompressed() || !b.isCompressed()) return false;
  const auto nnz = static_cast<std::size_t>(a.nonZeros());
  return std::memcmp(a.outerIndexPtr(), b.outerIndexPtr(), sizeof(int) * (a.outerSize() + 1)) == 0 &&
         std::memcmp(a.innerIndexPtr(), b.innerIndexPtr(), sizeof(int) * nnz) == 0 &&
         std::memcmp(a.valuePtr(), b.valuePtr(), sizeof(Scalar) * nnz) == 0;
}

struct Entry {
  SparseMatrix matrix;
  std::shared_ptr<const FactorPreconditioner> factor;
};

}  // namespace

std::shared_ptr<const FactorPreconditioner> FactorPreconditioner::of(const SparseMatrix& A) {
  thread_local std::deque<Entry> cache;
  SparseMatrix key = A;
  key.makeCompressed();
  for (const auto& e : cache)
    if (identical(e.matrix, key)) return e.factor;

  auto f = std::make_shared<FactorPreconditioner>();
  f->factor_.compute(key);
  if (f->factor_.info() != Eigen::Success || (f->factor_.vectorD().array() <= 0).any()) return nullptr;
  cache.push_front({std::move(key), f});
  if (cache.size() > 4) cache.pop_back();
  return f;
}

}  // namespace ekflow
