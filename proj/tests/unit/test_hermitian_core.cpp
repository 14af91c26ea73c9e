#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "momidx/errors.hpp"
#include "momidx/hermitian_core.hpp"

using namespace momidx;

namespace {

HermitianSection geo_t(std::size_t n) {
  return HermitianSection::from_lower(n, [](std::size_t j, std::size_t k) {
    return Complex(std::pow(-0.5, static_cast<double>(j - k)), 0.0);
  });
}

HermitianSection identity(std::size_t n) {
  return HermitianSection::from_lower(n, [](std::size_t j, std::size_t k) {
    return Complex(j == k ? 1.0 : 0.0, 0.0);
  });
}

ComplexMatrix random_hpd(std::mt19937_64& rng, Eigen::Index size) {
  std::normal_distribution<double> g;
  ComplexMatrix a(size, size);
  for (Eigen::Index i = 0; i < size; ++i)
    for (Eigen::Index j = 0; j < size; ++j) a(i, j) = Complex(g(rng), g(rng));
  ComplexMatrix m = a * a.adjoint();
  m += 0.1 * ComplexMatrix::Identity(size, size);
  return m;
}

}  // namespace

TEST_CASE("cholesky of small sections") {
  const CholeskyFactor id = cholesky(identity(2));
  CHECK((id.lower() - ComplexMatrix::Identity(3, 3)).norm() == 0.0);

  const CholeskyFactor t1 = cholesky(geo_t(1));
  CHECK(std::abs(t1(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(t1(1, 0) + 0.5) < 1e-15);
  CHECK(std::abs(t1(1, 1) - std::sqrt(3.0) / 2.0) < 1e-15);

  const CholeskyFactor t2 = cholesky(geo_t(2));
  CHECK(t2.pivot(0) == doctest::Approx(1.0));
  CHECK(t2.pivot(1) == doctest::Approx(0.75));
  CHECK(t2.pivot(2) == doctest::Approx(0.75));
}

TEST_CASE("cholesky agrees with Eigen LLT on random HPD matrices") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index size = 1 + trial % 15;
    const ComplexMatrix m = random_hpd(rng, size);
    const CholeskyFactor f = cholesky(HermitianSection::from_matrix(m));
    const Eigen::LLT<ComplexMatrix> llt(m);
    const ComplexMatrix ref = llt.matrixL();
    CHECK((f.lower() - ref).norm() < 1e-10 * ref.norm());
    CHECK((f.lower() * f.lower().adjoint() - m).norm() < 1e-10 * m.norm());
  }
}

TEST_CASE("extension") {
  const CholeskyFactor two = cholesky(identity(1));
  const std::vector<Complex> row{0.0, 0.0, 1.0};
  const CholeskyFactor three = cholesky_extend(two, row);
  CHECK((three.lower() - ComplexMatrix::Identity(3, 3)).norm() == 0.0);

  const CholeskyFactor one(Complex(1.0, 0.0));
  const std::vector<Complex> singular{1.0, 1.0};
  try {
    (void)cholesky_extend(one, singular);
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.failing_order() == 1);
  }

  CholeskyFactor in_place(Complex(1.0, 0.0));
  CHECK_THROWS_AS(in_place.extend_in_place(singular), NotPositiveDefinite);
  CHECK(in_place.order() == 0);
  CHECK_THROWS_AS(in_place.extend_in_place(std::vector<Complex>{1.0}), DimensionMismatch);

  // Incremental and batch factors coincide.
  std::mt19937_64 rng(3);
  const ComplexMatrix m = random_hpd(rng, 9);
  CholeskyFactor inc(m(0, 0));
  for (Eigen::Index n = 1; n < 9; ++n) {
    std::vector<Complex> r(static_cast<std::size_t>(n) + 1);
    for (Eigen::Index k = 0; k <= n; ++k) r[static_cast<std::size_t>(k)] = m(n, k);
    inc.extend_in_place(r);
  }
  CHECK((inc.lower() - cholesky(HermitianSection::from_matrix(m)).lower()).norm() == 0.0);
}

TEST_CASE("rank deficiency is reported at the failing order") {
  // Moments of two atoms: rank 2.
  const Complex a{0.6, 0.8};
  const Complex b{-1.0, 0.0};
  const HermitianSection s = HermitianSection::from_lower(3, [&](std::size_t j, std::size_t k) {
    return 0.5 * std::pow(a, static_cast<int>(j)) * std::pow(std::conj(a), static_cast<int>(k)) +
           0.5 * std::pow(b, static_cast<int>(j)) * std::pow(std::conj(b), static_cast<int>(k));
  });
  try {
    (void)cholesky(s);
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.failing_order() == 2);
  }
}

TEST_CASE("forward substitution") {
  const ComplexVector x = forward_solve(cholesky(identity(2)), ComplexVector::LinSpaced(3, 1.0, 3.0));
  CHECK(std::abs(x(0) - 1.0) + std::abs(x(1) - 2.0) + std::abs(x(2) - 3.0) == 0.0);

  ComplexVector b(2);
  b << 1.0, 0.0;
  const ComplexVector y = forward_solve(cholesky(geo_t(1)), b);
  CHECK(std::abs(y(0) - 1.0) < 1e-15);
  CHECK(std::abs(y(1) - 1.0 / std::sqrt(3.0)) < 1e-15);

  std::mt19937_64 rng(5);
  const ComplexMatrix m = random_hpd(rng, 7);
  const CholeskyFactor f = cholesky(HermitianSection::from_matrix(m));
  const ComplexVector rhs = ComplexVector::Random(7);
  const ComplexMatrix l = f.lower();
  CHECK((l * forward_solve(f, rhs) - rhs).norm() < 1e-12 * rhs.norm());
  CHECK_THROWS_AS(forward_solve(f, ComplexVector::Ones(3)), DimensionMismatch);
}

TEST_CASE("determinant ratios") {
  const CholeskyFactor t = cholesky(geo_t(6));
  CHECK(det_ratio(t, 1) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(det_ratio(t, 5) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(det_ratio(cholesky(identity(4)), 3) == 1.0);

  std::mt19937_64 rng(9);
  const ComplexMatrix m = random_hpd(rng, 8);
  const CholeskyFactor f = cholesky(HermitianSection::from_matrix(m));
  for (Eigen::Index k = 1; k < 8; ++k) {
    const double num = m.topLeftCorner(k + 1, k + 1).determinant().real();
    const double den = m.topLeftCorner(k, k).determinant().real();
    CHECK(det_ratio(f, static_cast<std::size_t>(k)) == doctest::Approx(num / den).epsilon(1e-9));
  }
  CHECK_THROWS_AS(det_ratio(f, 8), IndexOutOfRange);
}

TEST_CASE("smallest eigenvalue") {
  CHECK(smallest_eigenvalue(identity(4)) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(smallest_eigenvalue(geo_t(1)) == doctest::Approx(0.5).epsilon(1e-14));

  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::Index size = 1 + (trial * 7) % 40;
    const ComplexMatrix m = random_hpd(rng, size) - 2.0 * ComplexMatrix::Identity(size, size);
    const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m, Eigen::EigenvaluesOnly);
    const double ref = es.eigenvalues().minCoeff();
    const double got = smallest_eigenvalue(HermitianSection::from_matrix(m));
    CHECK(std::abs(got - ref) < 1e-11 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()));
  }

  const HermitianSection diag = HermitianSection::from_lower(5, [](std::size_t j, std::size_t k) {
    return Complex(j == k ? 3.0 - 0.5 * static_cast<double>(j) : 0.0, 0.0);
  });
  CHECK(smallest_eigenvalue(diag) == doctest::Approx(0.5));
}

TEST_CASE("sections") {
  ComplexMatrix m(2, 2);
  m << 1.0, Complex(0.0, 1.0), Complex(0.0, 1.0), 1.0;
  CHECK_THROWS_AS(HermitianSection::from_matrix(m), InvalidArgument);
  CHECK_THROWS_AS(HermitianSection::from_matrix(ComplexMatrix::Zero(2, 3)), DimensionMismatch);

  const HermitianSection t = geo_t(5);
  const HermitianSection lead = t.leading(2);
  CHECK(lead.order() == 2);
  CHECK(lead(2, 0) == t(2, 0));
  CHECK(t.max_diagonal() == 1.0);
  ComplexVector v(6);
  v << 1.0, 0.5, 0.0, 0.0, 0.0, 0.0;
  CHECK(t.quadratic_form(v) == doctest::Approx(0.75));
}
