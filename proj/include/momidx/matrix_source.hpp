#pragma once

// Lazy entry sources for infinite Hermitian matrices M = (c_{j,k}).

#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "momidx/hermitian_core.hpp"
#include "momidx/measures.hpp"

namespace momidx {

enum class OracleKind { Moment, ToeplitzSymbol, Explicit, Conjugated, Sum };

std::string to_string(OracleKind kind);

namespace detail {
class OracleImpl;
}

/// Immutable handle to a matrix source. Copies share the same memo cache,
/// which is guarded for concurrent use.
class MatrixOracle {
 public:
  /// Toeplitz coefficient generator: c(m) for m >= 0; c(-m) = conj(c(m)).
  using Coefficients = std::function<Complex(long)>;

  /// c_{j,k} = \int z^j \bar z^k d\mu, memoized row by row.
  static MatrixOracle moment(MeasureSpec measure, QuadratureConfig quad = {});
  /// c_{j,k} = coeff(j - k).
  static MatrixOracle toeplitz(Coefficients coeff, std::string description = "toeplitz");
  /// Coefficients of a finite conjugate-symmetric map; missing orders are 0.
  static MatrixOracle toeplitz(const std::map<int, Complex>& coeffs);
  /// Fourier coefficients of a closed-form density (lebesgue, geometric, fourier).
  static MatrixOracle toeplitz(const DensitySpec& symbol);
  static MatrixOracle explicit_matrix(HermitianSection entries);
  /// Sections B_n M_n B_n^* of the image under z -> alpha z + beta, with
  /// B = A_n(alpha, beta)^T the lower-triangular binomial matrix.
  static MatrixOracle conjugated(MatrixOracle inner, Complex alpha, Complex beta);
  static MatrixOracle sum(std::vector<std::pair<MatrixOracle, double>> parts);

  OracleKind kind() const;
  std::string description() const;

  Complex entry(std::size_t j, std::size_t k) const;
  HermitianSection section(std::size_t n) const;

  /// Largest addressable order (Explicit only).
  std::optional<std::size_t> max_order() const;

  /// Mass of atoms of the underlying measure at z0 (scales and similarity
  /// maps applied); 0 when the source has no atomic part there.
  double atom_mass_at(Complex z0, double tol = 1e-12) const;

  /// Underlying measure for Moment oracles.
  const MeasureSpec* measure() const;
  /// Scaled parts for Sum oracles; empty otherwise.
  std::vector<std::pair<MatrixOracle, double>> parts() const;

  /// Quadrature diagnostics accumulated so far (non-converged entries,
  /// largest error bound), including those of nested oracles.
  std::vector<std::string> warnings() const;
  double max_error_bound() const;

 private:
  explicit MatrixOracle(std::shared_ptr<const detail::OracleImpl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<const detail::OracleImpl> impl_;
};

}  // namespace momidx
