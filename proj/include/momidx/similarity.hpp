#pragma once

// Binomial similarity matrices for affine changes of variable z -> alpha z + beta.
//
// A_n(alpha, beta) is upper triangular with A[j][k] = C(k,j) alpha^j beta^{k-j}.
// With moments c_{j,k} = \int z^j \bar z^k d\mu, the image measure has the
// moment section
//
//     M~_n = A_n^T M_n conj(A_n) = B_n M_n B_n^*,   B_n = A_n^T,
//
// and because B_n is lower triangular the sections stay nested. The inverse is
// the matrix of the inverse map, A_n(alpha, beta)^{-1} = A_n(1/alpha, -beta/alpha),
// so the first row of A_n(1, -z0)^{-1} is (1, z0, ..., z0^n).

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "momidx/hermitian_core.hpp"
#include "momidx/matrix_source.hpp"

namespace momidx {

/// Binomials are formed by Pascal's rule in double precision; C(n,k)
/// overflows just above this order, so conjugation is refused beyond it.
inline constexpr std::size_t kMaxBinomialOrder = 1029;

class AffineMap {
 public:
  AffineMap() = default;
  /// Throws InvalidArgument when alpha == 0.
  AffineMap(Complex alpha, Complex beta);

  Complex alpha() const noexcept { return alpha_; }
  Complex beta() const noexcept { return beta_; }

  Complex operator()(Complex z) const { return alpha_ * z + beta_; }
  AffineMap inverse() const;
  /// z -> outer(this(z)).
  AffineMap then(const AffineMap& outer) const;

 private:
  Complex alpha_{1.0, 0.0};
  Complex beta_{0.0, 0.0};
};

struct BinomialMatrix {
  AffineMap map;
  /// Upper triangular (n+1)x(n+1).
  ComplexMatrix upper;

  std::size_t order() const noexcept { return static_cast<std::size_t>(upper.rows()) - 1; }
};

BinomialMatrix binomial_matrix(std::size_t n, const AffineMap& map);

/// Closed form A_n(alpha, beta)^{-1} = A_n(1/alpha, -beta/alpha).
BinomialMatrix inverse_binomial(const BinomialMatrix& b);

/// Moment section of the image measure: B M B^* with B = A_n^T, row by row so
/// that each entry depends only on (j, k) and leading blocks are reproduced
/// exactly. Hermitian symmetry is restored by mirroring.
HermitianSection conjugate_section(const HermitianSection& s, const AffineMap& map);

struct ShiftCrosscheck {
  Complex z0{0.0, 0.0};
  /// gamma_{z0,n} through the kernel of M.
  std::vector<double> direct;
  /// gamma_n of the conjugated oracle (map z -> z - z0).
  std::vector<double> conjugated;
  /// Orders compared: min of the two sequence lengths.
  std::size_t orders_compared = 0;
  double max_rel_gap = 0.0;
  std::vector<std::string> warnings;
};

/// Computes gamma_{z0}(M) along the kernel path and along the conjugation
/// path and reports their largest relative disagreement. A breakdown on either
/// path stops that path early and is reported in `warnings`.
ShiftCrosscheck gamma_shift_crosscheck(const MatrixOracle& o, Complex z0, std::size_t n,
                                       double pivot_tol = CholeskyFactor::kDefaultPivotTol);

}  // namespace momidx
