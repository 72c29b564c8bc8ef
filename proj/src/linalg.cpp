#include "mirrornoise/linalg.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "mirrornoise/error.hpp"

namespace mirrornoise {

LuFactorization::LuFactorization(ComplexMatrix a, double freq_hz) : lu_(std::move(a)) {
  const int n = lu_.size();
  perm_.resize(static_cast<std::size_t>(n));
  double scale = 0.0;
  for (int r = 0; r < n; ++r) {
    perm_[static_cast<std::size_t>(r)] = r;
    for (int c = 0; c < n; ++c) scale = std::max(scale, std::abs(lu_(r, c)));
  }
  const double tol = n * std::numeric_limits<double>::epsilon() * scale;

  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(lu_(k, k));
    for (int r = k + 1; r < n; ++r) {
      const double m = std::abs(lu_(r, k));
      if (m > best) best = m, piv = r;
    }
    if (!(best > tol)) throw SingularMatrixError(freq_hz, k);
    if (piv != k) {
      for (int c = 0; c < n; ++c) std::swap(lu_(k, c), lu_(piv, c));
      std::swap(perm_[static_cast<std::size_t>(k)], perm_[static_cast<std::size_t>(piv)]);
    }
    const cplx inv = 1.0 / lu_(k, k);
    for (int r = k + 1; r < n; ++r) {
      const cplx f = lu_(r, k) * inv;
      lu_(r, k) = f;
      if (f == cplx{}) continue;
      for (int c = k + 1; c < n; ++c) lu_(r, c) -= f * lu_(k, c);
    }
  }
}

std::vector<cplx> LuFactorization::solve(std::vector<cplx> b) const {
  const int n = lu_.size();
  std::vector<cplx> x(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    cplx s = b[static_cast<std::size_t>(perm_[static_cast<std::size_t>(r)])];
    for (int c = 0; c < r; ++c) s -= lu_(r, c) * x[static_cast<std::size_t>(c)];
    x[static_cast<std::size_t>(r)] = s;
  }
  for (int r = n - 1; r >= 0; --r) {
    cplx s = x[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < n; ++c) s -= lu_(r, c) * x[static_cast<std::size_t>(c)];
    x[static_cast<std::size_t>(r)] = s / lu_(r, r);
  }
  return x;
}

}  // namespace mirrornoise
