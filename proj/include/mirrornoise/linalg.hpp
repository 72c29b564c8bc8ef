#pragma once

#include <complex>
#include <vector>

namespace mirrornoise {

using cplx = std::complex<double>;

// Dense row-major square matrix. MNA systems here have tens of unknowns,
// so a dense layout beats any sparse bookkeeping.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n) {}

  int size() const { return n_; }
  cplx& operator()(int r, int c) { return a_[static_cast<std::size_t>(r) * n_ + c]; }
  const cplx& operator()(int r, int c) const { return a_[static_cast<std::size_t>(r) * n_ + c]; }

 private:
  int n_ = 0;
  std::vector<cplx> a_;
};

// LU with partial (row) pivoting. A pivot with magnitude at or below
// n * eps * max|A| is treated as exact singularity and raises
// SingularMatrixError carrying the frequency and the pivot column.
class LuFactorization {
 public:
  LuFactorization(ComplexMatrix a, double freq_hz);

  std::vector<cplx> solve(std::vector<cplx> b) const;
  int size() const { return lu_.size(); }

 private:
  ComplexMatrix lu_;
  std::vector<int> perm_;
};

}  // namespace mirrornoise
