#pragma once

// Orthonormal polynomials and Christoffel-Darboux kernel diagonals, read off
// a Cholesky factor of the moment section.

#include <complex>
#include <cstddef>
#include <vector>

#include "momidx/hermitian_core.hpp"

namespace momidx {

/// rows(i, j) = v_{j,i}: coefficient of z^j in phi_i(z). Lower triangular
/// with a positive real diagonal; rows * M_n * rows^* = I.
struct OrthonormalBasis {
  std::size_t order = 0;
  ComplexMatrix rows;
};

/// K_n(z0, z0) = sum_{k<=n} |phi_k(z0)|^2.
struct KernelValue {
  Complex z0{0.0, 0.0};
  std::size_t order = 0;
  /// May be +inf when the kernel exceeds double range; log_value stays finite.
  double value = 0.0;
  double log_value = 0.0;
  /// |phi_n(z0)|^2, the last term added.
  double phi_tail = 0.0;

  /// 1 / K_n(z0, z0), computed from log_value so it never overflows.
  double reciprocal() const;
};

/// Kernel sums beyond this value of n * log|z0| raise Overflow.
inline constexpr double kMaxLogPower = 600.0;

OrthonormalBasis orthonormal_coeffs(const CholeskyFactor& f);

/// (phi_0(z), ..., phi_n(z)) by Horner evaluation of every row.
ComplexVector eval_phi(const OrthonormalBasis& b, Complex z);

/// ||x||^2 where L x = (1, z0, ..., z0^n). For |z0| > 1 the right-hand side
/// is rescaled by |z0|^n and the scale is carried in log_value.
KernelValue kernel_diag(const CholeskyFactor& f, Complex z0);

/// (||Phi_0||^2, ..., ||Phi_n||^2) for the monic orthogonal polynomials,
/// ||Phi_k||^2 = L(k,k)^2.
std::vector<double> monic_norms(const CholeskyFactor& f);

/// Order-by-order kernel evaluation along an incremental factor sweep: after
/// the factor has grown to order n, advance() consumes row n in O(n).
class KernelAccumulator {
 public:
  explicit KernelAccumulator(Complex z0);

  Complex z0() const noexcept { return z0_; }
  std::size_t next_order() const noexcept { return scaled_.size(); }

  /// Requires f.order() == next_order(). Throws Overflow when
  /// n * log|z0| exceeds kMaxLogPower.
  KernelValue advance(const CholeskyFactor& f);

 private:
  Complex z0_;
  double scale_;          // max(1, |z0|)
  double log_scale_;      // log(scale_)
  Complex unit_power_;    // (z0 / scale_)^n for the next n
  std::vector<Complex> scaled_;  // x_j / scale^n for the current order n
  double scaled_norm2_ = 0.0;
};

}  // namespace momidx
