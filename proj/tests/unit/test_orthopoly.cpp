#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/LU>

#include "momidx/errors.hpp"
#include "momidx/hermitian_core.hpp"
#include "momidx/orthopoly.hpp"

using namespace momidx;

namespace {

HermitianSection geo_t(std::size_t n) {
  return HermitianSection::from_lower(n, [](std::size_t j, std::size_t k) {
    return Complex(std::pow(-0.5, static_cast<double>(j - k)), 0.0);
  });
}

CholeskyFactor identity_factor(std::size_t n) {
  return cholesky(HermitianSection::from_lower(
      n, [](std::size_t j, std::size_t k) { return Complex(j == k ? 1.0 : 0.0, 0.0); }));
}

ComplexMatrix random_hpd(std::mt19937_64& rng, Eigen::Index size) {
  std::normal_distribution<double> g;
  ComplexMatrix a(size, size);
  for (Eigen::Index i = 0; i < size; ++i)
    for (Eigen::Index j = 0; j < size; ++j) a(i, j) = Complex(g(rng), g(rng));
  return a * a.adjoint() + 0.2 * ComplexMatrix::Identity(size, size);
}

ComplexVector powers(Complex z, Eigen::Index size) {
  ComplexVector k(size);
  Complex p{1.0, 0.0};
  for (Eigen::Index i = 0; i < size; ++i, p *= z) k(i) = p;
  return k;
}

}  // namespace

TEST_CASE("identity basis is the monomials") {
  const OrthonormalBasis b = orthonormal_coeffs(identity_factor(4));
  CHECK((b.rows - ComplexMatrix::Identity(5, 5)).norm() == 0.0);

  const ComplexVector at0 = eval_phi(b, {0.0, 0.0});
  CHECK(std::abs(at0(0) - 1.0) == 0.0);
  CHECK(at0.tail(4).norm() == 0.0);

  const ComplexVector half = eval_phi(b, {0.5, 0.0});
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(std::abs(half(i) - std::pow(0.5, static_cast<double>(i))) < 1e-15);
}

TEST_CASE("Gram identity") {
  const HermitianSection t = geo_t(6);
  const OrthonormalBasis b = orthonormal_coeffs(cholesky(t));
  CHECK((b.rows * t.matrix() * b.rows.adjoint() - ComplexMatrix::Identity(7, 7)).norm() < 1e-13);
  // phi_1 is proportional to 1 + 2z: orthogonal to 1 under T.
  CHECK(std::abs(b.rows(1, 1) / b.rows(1, 0) - 2.0) < 1e-13);

  std::mt19937_64 rng(21);
  const ComplexMatrix m = random_hpd(rng, 10);
  const OrthonormalBasis r = orthonormal_coeffs(cholesky(HermitianSection::from_matrix(m)));
  CHECK((r.rows * m * r.rows.adjoint() - ComplexMatrix::Identity(10, 10)).norm() < 1e-10);
  for (Eigen::Index i = 0; i < 10; ++i) {
    CHECK(r.rows(i, i).imag() == 0.0);
    CHECK(r.rows(i, i).real() > 0.0);
  }
}

TEST_CASE("kernel on the identity is a geometric sum") {
  const std::size_t n = 20;
  const CholeskyFactor f = identity_factor(n);
  const Complex z0{0.3, -0.4};
  const double r2 = std::norm(z0);
  const double expected = (1.0 - std::pow(r2, static_cast<double>(n + 1))) / (1.0 - r2);
  const KernelValue k = kernel_diag(f, z0);
  CHECK(k.value == doctest::Approx(expected).epsilon(1e-14));
  CHECK(k.reciprocal() == doctest::Approx(1.0 / expected).epsilon(1e-14));
  CHECK(k.phi_tail == doctest::Approx(std::pow(r2, static_cast<double>(n))).epsilon(1e-12));
}

TEST_CASE("kernel of order zero is the reciprocal mass") {
  const CholeskyFactor f(Complex(2.5, 0.0));
  CHECK(kernel_diag(f, {0.7, 0.1}).value == doctest::Approx(0.4));
}

TEST_CASE("kernel equals the dense inverse quadratic form") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index size = 1 + trial % 12;
    const ComplexMatrix m = random_hpd(rng, size);
    const CholeskyFactor f = cholesky(HermitianSection::from_matrix(m));
    const Complex z0{u(rng), u(rng)};
    // k = (1, z0, ..., z0^n)
    const ComplexVector k = powers(z0, size);
    const double ref = (k.adjoint() * m.inverse() * k)(0, 0).real();
    const KernelValue kv = kernel_diag(f, z0);
    CHECK(kv.value == doctest::Approx(ref).epsilon(1e-8));
    const ComplexVector phi = eval_phi(orthonormal_coeffs(f), z0);
    CHECK(phi.squaredNorm() == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("large points are rescaled, then overflow") {
  const CholeskyFactor f = identity_factor(30);
  const Complex z0{3.0, 0.0};
  double direct = 0.0;
  for (int k = 0; k <= 30; ++k) direct += std::pow(9.0, k);
  const KernelValue kv = kernel_diag(f, z0);
  CHECK(kv.value == doctest::Approx(direct).epsilon(1e-13));
  CHECK(kv.log_value == doctest::Approx(std::log(direct)).epsilon(1e-13));

  CHECK_THROWS_AS(kernel_diag(identity_factor(700), {3.0, 0.0}), Overflow);

  // log|z0| * n just under the cap: value is +inf, reciprocal stays finite.
  const KernelValue huge = kernel_diag(identity_factor(520), {2.0, 0.0});
  CHECK(std::isinf(huge.value));
  CHECK(huge.reciprocal() > 0.0);
  CHECK(huge.reciprocal() < 1e-300);
}

TEST_CASE("accumulator matches the batch kernel order by order") {
  std::mt19937_64 rng(29);
  const ComplexMatrix m = random_hpd(rng, 12);
  for (const Complex z0 : {Complex(0.0, 0.0), Complex(0.4, 0.3), Complex(-1.8, 0.6)}) {
    CholeskyFactor f(m(0, 0));
    KernelAccumulator acc(z0);
    for (Eigen::Index n = 0; n < 12; ++n) {
      if (n > 0) {
        std::vector<Complex> row(static_cast<std::size_t>(n) + 1);
        for (Eigen::Index k = 0; k <= n; ++k) row[static_cast<std::size_t>(k)] = m(n, k);
        f.extend_in_place(row);
      }
      const KernelValue a = acc.advance(f);
      const KernelValue b = kernel_diag(f, z0);
      CHECK(a.order == static_cast<std::size_t>(n));
      CHECK(a.log_value == doctest::Approx(b.log_value).epsilon(1e-12));
    }
  }
}

TEST_CASE("monic norms") {
  for (double v : monic_norms(identity_factor(5))) CHECK(v == 1.0);
  const std::vector<double> t = monic_norms(cholesky(geo_t(8)));
  CHECK(t[0] == doctest::Approx(1.0));
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k] == doctest::Approx(0.75).epsilon(1e-13));

  std::mt19937_64 rng(31);
  const ComplexMatrix m = random_hpd(rng, 9);
  const std::vector<double> r = monic_norms(cholesky(HermitianSection::from_matrix(m)));
  for (Eigen::Index k = 1; k < 9; ++k) {
    const double ratio =
        m.topLeftCorner(k + 1, k + 1).determinant().real() / m.topLeftCorner(k, k).determinant().real();
    CHECK(r[static_cast<std::size_t>(k)] == doctest::Approx(ratio).epsilon(1e-9));
  }
}
