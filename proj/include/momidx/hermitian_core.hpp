#pragma once

// Dense Hermitian kernels: sections, incremental Cholesky, triangular solves,
// pivot ratios and the smallest eigenvalue.

#include <complex>
#include <cstddef>
#include <span>

#include <Eigen/Core>

namespace momidx {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

/// Leading (n+1)x(n+1) truncation M_n of an infinite Hermitian matrix.
/// Only the lower triangle is ever computed; the upper one is its mirror, so
/// data(j,k) == conj(data(k,j)) holds bit for bit and the diagonal is real.
class HermitianSection {
 public:
  HermitianSection() = default;

  /// Builds M_n from `lower(j, k)` for k <= j.
  template <class Lower>
  static HermitianSection from_lower(std::size_t order, Lower&& lower) {
    const auto size = static_cast<Eigen::Index>(order + 1);
    ComplexMatrix m(size, size);
    for (Eigen::Index j = 0; j < size; ++j) {
      for (Eigen::Index k = 0; k < j; ++k) {
        const Complex v = lower(static_cast<std::size_t>(j), static_cast<std::size_t>(k));
        m(j, k) = v;
        m(k, j) = std::conj(v);
      }
      m(j, j) = Complex(lower(static_cast<std::size_t>(j), static_cast<std::size_t>(j)).real(), 0.0);
    }
    return HermitianSection(std::move(m));
  }

  /// Accepts a square matrix whose asymmetry |a_jk - conj(a_kj)| stays below
  /// tol * max(1, max |a|); the lower triangle wins. Throws otherwise.
  static HermitianSection from_matrix(const ComplexMatrix& m, double tol = 1e-12);

  std::size_t order() const noexcept { return static_cast<std::size_t>(data_.rows()) - 1; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(data_.rows()); }
  bool empty() const noexcept { return data_.size() == 0; }

  Complex operator()(std::size_t j, std::size_t k) const {
    return data_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
  }
  const ComplexMatrix& matrix() const noexcept { return data_; }

  HermitianSection leading(std::size_t order) const;
  double max_diagonal() const;

  /// v M v^* for a coefficient row vector v.
  double quadratic_form(const ComplexVector& v) const;

 private:
  explicit HermitianSection(ComplexMatrix m) : data_(std::move(m)) {}

  ComplexMatrix data_;
};

/// Lower-triangular L with L L^* = M_n and a strictly positive real diagonal.
/// Row i of L^{-1} holds the coefficients of the i-th orthonormal polynomial,
/// and L(k,k)^2 = |M_k| / |M_{k-1}|.
class CholeskyFactor {
 public:
  static constexpr double kDefaultPivotTol = 1e-13;

  /// Factor of the 1x1 section [c00].
  CholeskyFactor(Complex c00, double pivot_tol = kDefaultPivotTol);

  std::size_t order() const noexcept { return order_; }
  std::size_t size() const noexcept { return order_ + 1; }
  double pivot_tol() const noexcept { return pivot_tol_; }
  double max_diagonal() const noexcept { return max_diag_; }

  Complex operator()(std::size_t i, std::size_t j) const {
    return l_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  /// Squared diagonal entry L(k,k)^2.
  double pivot(std::size_t k) const;

  /// Copy of L as a dense (n+1)x(n+1) matrix.
  ComplexMatrix lower() const;

  /// Appends row n+1 of the next section in place. Throws NotPositiveDefinite
  /// and leaves the factor unchanged when the new pivot is too small.
  void extend_in_place(std::span<const Complex> new_row);

  /// Reserves storage for factors up to `order` so in-place extension does
  /// not reallocate.
  void reserve(std::size_t order);

 private:
  using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  RowMajor l_;
  std::size_t order_ = 0;
  double pivot_tol_;
  double max_diag_;
};

/// Batch factorization. Throws NotPositiveDefinite{failing_order} when a
/// pivot drops to pivot_tol * (max diagonal so far) or below.
CholeskyFactor cholesky(const HermitianSection& s,
                        double pivot_tol = CholeskyFactor::kDefaultPivotTol);

/// Factor of the section one order larger; `new_row` is row n+1 of it
/// (length n+2). The leading block is copied unchanged.
CholeskyFactor cholesky_extend(const CholeskyFactor& f, std::span<const Complex> new_row);

/// Solves L x = b by forward substitution.
ComplexVector forward_solve(const CholeskyFactor& f, const ComplexVector& b);

/// |M_k| / |M_{k-1}| = L(k,k)^2; M(0,0) for k = 0.
double det_ratio(const CholeskyFactor& f, std::size_t k);

/// Smallest eigenvalue of the section: Householder reduction to a real
/// symmetric tridiagonal matrix followed by Sturm-sequence bisection.
/// Throws NoConvergence with the final bracket if bisection stalls.
double smallest_eigenvalue(const HermitianSection& s);

}  // namespace momidx
