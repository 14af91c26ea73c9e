#include "momidx/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "momidx/errors.hpp"
#include "momidx/indexes.hpp"

namespace momidx {

AffineMap::AffineMap(Complex alpha, Complex beta) : alpha_(alpha), beta_(beta) {
  if (alpha == Complex(0.0, 0.0)) throw InvalidArgument("affine map needs alpha != 0");
  if (!std::isfinite(std::abs(alpha)) || !std::isfinite(std::abs(beta)))
    throw InvalidArgument("affine map coefficients must be finite");
}

AffineMap AffineMap::inverse() const { return AffineMap(1.0 / alpha_, -beta_ / alpha_); }

AffineMap AffineMap::then(const AffineMap& outer) const {
  return AffineMap(outer.alpha_ * alpha_, outer.alpha_ * beta_ + outer.beta_);
}

namespace {

// Pascal triangle rows 0..n, row j holding C(j, 0..j).
std::vector<std::vector<double>> pascal(std::size_t n) {
  std::vector<std::vector<double>> c(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    c[j].assign(j + 1, 1.0);
    for (std::size_t k = 1; k < j; ++k) c[j][k] = c[j - 1][k - 1] + c[j - 1][k];
  }
  return c;
}

std::vector<Complex> powers(Complex z, std::size_t n) {
  std::vector<Complex> p(n + 1);
  p[0] = 1.0;
  for (std::size_t i = 1; i <= n; ++i) p[i] = p[i - 1] * z;
  return p;
}

void check_order(std::size_t n) {
  if (n > kMaxBinomialOrder)
    throw InvalidArgument("binomial matrices are limited to order " + std::to_string(kMaxBinomialOrder));
}

}  // namespace

BinomialMatrix binomial_matrix(std::size_t n, const AffineMap& map) {
  check_order(n);
  const auto c = pascal(n);
  const auto pa = powers(map.alpha(), n);
  const auto pb = powers(map.beta(), n);
  BinomialMatrix b;
  b.map = map;
  const auto size = static_cast<Eigen::Index>(n + 1);
  b.upper = ComplexMatrix::Zero(size, size);
  for (std::size_t k = 0; k <= n; ++k)
    for (std::size_t j = 0; j <= k; ++j)
      b.upper(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = c[k][j] * pa[j] * pb[k - j];
  return b;
}

BinomialMatrix inverse_binomial(const BinomialMatrix& b) {
  return binomial_matrix(b.order(), b.map.inverse());
}

HermitianSection conjugate_section(const HermitianSection& s, const AffineMap& map) {
  const std::size_t n = s.order();
  check_order(n);
  const auto c = pascal(n);
  const auto pa = powers(map.alpha(), n);
  const auto pb = powers(map.beta(), n);

  // Lower-triangular B = A^T: B[j][p] = C(j,p) alpha^p beta^{j-p}.
  std::vector<std::vector<Complex>> bl(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    bl[j].resize(j + 1);
    for (std::size_t p = 0; p <= j; ++p) bl[j][p] = c[j][p] * pa[p] * pb[j - p];
  }

  std::vector<std::vector<Complex>> lower(n + 1);
  std::vector<Complex> u(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    // u = B[j, 0..j] * M[0..j, 0..j]
    for (std::size_t q = 0; q <= j; ++q) {
      Complex acc = 0.0;
      for (std::size_t p = 0; p <= j; ++p) acc += bl[j][p] * s(p, q);
      u[q] = acc;
    }
    lower[j].resize(j + 1);
    for (std::size_t k = 0; k <= j; ++k) {
      Complex acc = 0.0;
      for (std::size_t q = 0; q <= k; ++q) acc += u[q] * std::conj(bl[k][q]);
      lower[j][k] = acc;
    }
  }
  return HermitianSection::from_lower(n, [&](std::size_t j, std::size_t k) { return lower[j][k]; });
}

ShiftCrosscheck gamma_shift_crosscheck(const MatrixOracle& o, Complex z0, std::size_t n,
                                       double pivot_tol) {
  if (n < 1) throw InvalidArgument("crosscheck needs order >= 1");
  const SweepOptions opts{true, pivot_tol};

  ShiftCrosscheck out;
  out.z0 = z0;
  const IndexSequence direct = gamma_at_sequence(o, z0, n, opts);
  const IndexSequence conj = gamma_sequence(MatrixOracle::conjugated(o, 1.0, -z0), n, opts);
  out.direct = direct.values;
  out.conjugated = conj.values;

  auto note = [&](const IndexSequence& s, const char* path) {
    if (!s.breakdown) return;
    std::ostringstream msg;
    msg << path << " path stopped at order " << s.breakdown->order << " (pivot " << s.breakdown->pivot << ")";
    out.warnings.push_back(msg.str());
  };
  note(direct, "kernel");
  note(conj, "conjugation");

  out.orders_compared = std::min(out.direct.size(), out.conjugated.size());
  for (std::size_t m = 0; m < out.orders_compared; ++m) {
    const double d = out.direct[m];
    const double c = out.conjugated[m];
    const double denom = std::max(std::abs(d), std::numeric_limits<double>::min());
    out.max_rel_gap = std::max(out.max_rel_gap, std::abs(d - c) / denom);
  }
  if (out.max_rel_gap > 1e-6) {
    std::ostringstream msg;
    msg << "kernel and conjugation paths disagree by " << out.max_rel_gap
        << " (relative); the conjugated section is poorly conditioned";
    out.warnings.push_back(msg.str());
  }
  return out;
}

}  // namespace momidx
