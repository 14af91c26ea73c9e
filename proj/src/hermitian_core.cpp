#include "momidx/hermitian_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "momidx/errors.hpp"

namespace momidx {

// ---------------------------------------------------------------------------
// HermitianSection
// ---------------------------------------------------------------------------

HermitianSection HermitianSection::from_matrix(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DimensionMismatch("hermitian section must be a nonempty square matrix");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    if (std::abs(m(j, j).imag()) > tol * scale)
      throw InvalidArgument("diagonal entry " + std::to_string(j) + " is not real");
    for (Eigen::Index k = 0; k < j; ++k)
      if (std::abs(m(j, k) - std::conj(m(k, j))) > tol * scale)
        throw InvalidArgument("matrix is not Hermitian at (" + std::to_string(j) + "," +
                              std::to_string(k) + ")");
  }
  return from_lower(static_cast<std::size_t>(m.rows() - 1), [&](std::size_t j, std::size_t k) {
    return m(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
  });
}

HermitianSection HermitianSection::leading(std::size_t order) const {
  if (order > this->order()) throw IndexOutOfRange("leading block larger than section");
  const auto size = static_cast<Eigen::Index>(order + 1);
  return HermitianSection(data_.topLeftCorner(size, size));
}

double HermitianSection::max_diagonal() const { return data_.diagonal().real().maxCoeff(); }

double HermitianSection::quadratic_form(const ComplexVector& v) const {
  if (static_cast<std::size_t>(v.size()) != size())
    throw DimensionMismatch("quadratic form vector length");
  return (v.transpose() * data_ * v.conjugate())(0, 0).real();
}

// ---------------------------------------------------------------------------
// Cholesky
// ---------------------------------------------------------------------------

CholeskyFactor::CholeskyFactor(Complex c00, double pivot_tol)
    : l_(RowMajor::Zero(1, 1)), pivot_tol_(pivot_tol), max_diag_(c00.real()) {
  if (!(c00.real() > 0.0)) throw NotPositiveDefinite(0, c00.real());
  l_(0, 0) = std::sqrt(c00.real());
}

double CholeskyFactor::pivot(std::size_t k) const {
  if (k > order_) throw IndexOutOfRange("pivot index beyond factor order");
  const double d = l_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)).real();
  return d * d;
}

ComplexMatrix CholeskyFactor::lower() const {
  const auto n = static_cast<Eigen::Index>(size());
  return l_.topLeftCorner(n, n);
}

void CholeskyFactor::reserve(std::size_t order) {
  const auto want = static_cast<Eigen::Index>(order + 1);
  if (l_.rows() < want) l_.conservativeResizeLike(RowMajor::Zero(want, want));
}

void CholeskyFactor::extend_in_place(std::span<const Complex> new_row) {
  const std::size_t m = order_ + 1;
  if (new_row.size() != m + 1)
    throw DimensionMismatch("extension row must have length " + std::to_string(m + 1));
  const double diag = new_row[m].real();
  const double max_diag = std::max(max_diag_, diag);

  Eigen::Matrix<Complex, 1, Eigen::Dynamic> row(static_cast<Eigen::Index>(m));
  double norm2 = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    Complex s = new_row[k];
    if (k > 0) s -= l_.row(kk).head(kk).conjugate().cwiseProduct(row.head(kk)).sum();
    row(kk) = s / l_(kk, kk).real();
    norm2 += std::norm(row(kk));
  }
  const double pivot = diag - norm2;
  if (!(pivot > pivot_tol_ * max_diag)) throw NotPositiveDefinite(m, pivot);

  if (static_cast<std::size_t>(l_.rows()) < m + 1) reserve(std::max<std::size_t>(2 * m, m + 1));
  const auto mm = static_cast<Eigen::Index>(m);
  l_.row(mm).head(mm) = row;
  l_(mm, mm) = std::sqrt(pivot);
  order_ = m;
  max_diag_ = max_diag;
}

CholeskyFactor cholesky(const HermitianSection& s, double pivot_tol) {
  CholeskyFactor f(s(0, 0), pivot_tol);
  f.reserve(s.order());
  std::vector<Complex> row;
  for (std::size_t m = 1; m <= s.order(); ++m) {
    row.resize(m + 1);
    for (std::size_t k = 0; k <= m; ++k) row[k] = s(m, k);
    f.extend_in_place(row);
  }
  return f;
}

CholeskyFactor cholesky_extend(const CholeskyFactor& f, std::span<const Complex> new_row) {
  CholeskyFactor out = f;
  out.reserve(f.order() + 1);
  out.extend_in_place(new_row);
  return out;
}

ComplexVector forward_solve(const CholeskyFactor& f, const ComplexVector& b) {
  const std::size_t n = f.size();
  if (static_cast<std::size_t>(b.size()) != n)
    throw DimensionMismatch("right-hand side length must equal factor size");
  ComplexVector x(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    Complex s = b(static_cast<Eigen::Index>(i));
    for (std::size_t t = 0; t < i; ++t) s -= f(i, t) * x(static_cast<Eigen::Index>(t));
    x(static_cast<Eigen::Index>(i)) = s / f(i, i).real();
  }
  return x;
}

double det_ratio(const CholeskyFactor& f, std::size_t k) { return f.pivot(k); }

// ---------------------------------------------------------------------------
// Smallest eigenvalue
// ---------------------------------------------------------------------------

namespace {

struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;  // |subdiagonal|, length n-1
};

// Unitary Householder reduction A -> Q^* A Q with Q^* A Q tridiagonal. The
// complex subdiagonal is made real and nonnegative by a diagonal unitary
// similarity, which only changes its phases, so the moduli are kept.
Tridiagonal tridiagonalize(const ComplexMatrix& input) {
  ComplexMatrix a = input;
  const Eigen::Index n = a.rows();
  Tridiagonal t;
  t.diag.resize(static_cast<std::size_t>(n));
  t.off.resize(static_cast<std::size_t>(std::max<Eigen::Index>(n - 1, 0)));

  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    const Eigen::Index m = n - k - 1;
    ComplexVector v = a.col(k).tail(m);
    const double tail = v.tail(m - 1).norm();
    const Complex x0 = v(0);
    if (tail == 0.0) {
      t.off[static_cast<std::size_t>(k)] = std::abs(x0);
      continue;
    }
    const double xnorm = std::hypot(std::abs(x0), tail);
    const Complex alpha = -std::polar(xnorm, std::arg(x0));
    v(0) -= alpha;
    const double tau = 1.0 / (xnorm * xnorm + xnorm * std::abs(x0));

    auto sub = a.bottomRightCorner(m, m);
    ComplexVector p = tau * (sub * v);
    const Complex half = 0.5 * tau * v.dot(p);
    ComplexVector w = p - half * v;
    sub.noalias() -= v * w.adjoint();
    sub.noalias() -= w * v.adjoint();

    t.off[static_cast<std::size_t>(k)] = xnorm;
  }
  for (Eigen::Index i = 0; i < n; ++i) t.diag[static_cast<std::size_t>(i)] = a(i, i).real();
  if (n >= 2) t.off[static_cast<std::size_t>(n - 2)] = std::abs(a(n - 1, n - 2));
  return t;
}

// Number of eigenvalues strictly below x (Sturm sequence / LDL^T inertia).
std::size_t count_below(const Tridiagonal& t, double x, double pivmin) {
  std::size_t count = 0;
  double q = t.diag[0] - x;
  if (std::abs(q) < pivmin) q = -pivmin;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < t.diag.size(); ++i) {
    const double b = t.off[i - 1];
    q = t.diag[i] - x - b * b / q;
    if (std::abs(q) < pivmin) q = -pivmin;
    if (q < 0.0) ++count;
  }
  return count;
}

}  // namespace

double smallest_eigenvalue(const HermitianSection& s) {
  if (s.empty()) throw InvalidArgument("empty section");
  if (s.size() == 1) return s(0, 0).real();

  const Tridiagonal t = tridiagonalize(s.matrix());
  const std::size_t n = t.diag.size();

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  double norm = 0.0;
  double max_off2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? t.off[i - 1] : 0.0) + (i + 1 < n ? t.off[i] : 0.0);
    lo = std::min(lo, t.diag[i] - r);
    hi = std::max(hi, t.diag[i] + r);
    norm = std::max(norm, std::abs(t.diag[i]) + r);
    if (i + 1 < n) max_off2 = std::max(max_off2, t.off[i] * t.off[i]);
  }
  const double eps = std::numeric_limits<double>::epsilon();
  const double pivmin = std::numeric_limits<double>::min() * std::max(1.0, max_off2);
  const double abs_floor = eps * norm;
  lo -= 2.0 * abs_floor + pivmin;
  hi += 2.0 * abs_floor + pivmin;

  constexpr int kMaxIterations = 200;
  for (int it = 0; it < kMaxIterations; ++it) {
    const double width = hi - lo;
    if (width <= std::max(2.0 * eps * std::max(std::abs(lo), std::abs(hi)), abs_floor))
      return 0.5 * (lo + hi);
    const double mid = lo + 0.5 * width;
    if (count_below(t, mid, pivmin) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  throw NoConvergence(lo, hi);
}

}  // namespace momidx
