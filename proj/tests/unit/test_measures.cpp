#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "momidx/errors.hpp"
#include "momidx/matrix_source.hpp"
#include "momidx/measures.hpp"

using namespace momidx;

namespace {

constexpr double kPi = std::numbers::pi;

MeasureSpec circle(DensitySpec d, double radius = 1.0, Complex center = {0.0, 0.0}) {
  return CircleDensity{std::move(d), radius, center, 0.0};
}

AtomicMeasure roots_example(int count) {
  AtomicMeasure a;
  for (int n = 1; n <= count; ++n) {
    a.atoms.push_back({std::polar(1.0, 2.0 * kPi / n), std::ldexp(1.0, -n)});
  }
  a.declared_tail_mass = std::ldexp(1.0, -count);
  a.support_radius_bound = 1.0;
  return a;
}

// Plain Riemann sum over a fine grid; exact for trigonometric polynomials of
// degree below the node count.
Complex brute_moment(const CurveFamily& c, const DensitySpec& d, std::size_t j, std::size_t k,
                     int nodes = 4096) {
  Complex acc{0.0, 0.0};
  for (int l = 0; l < nodes; ++l) {
    const double t = 2.0 * kPi * l / nodes;
    const Complex z = c.point(t);
    acc += std::pow(z, static_cast<int>(j)) * std::pow(std::conj(z), static_cast<int>(k)) * d(t);
  }
  return acc / static_cast<double>(nodes);
}

}  // namespace

TEST_CASE("lebesgue circle moments") {
  const MeasureSpec m = lebesgue_circle();
  CHECK(std::abs(moment(m, 2, 2).value - 1.0) < 1e-14);
  CHECK(std::abs(moment(m, 3, 1).value) < 1e-14);
  CHECK(std::abs(moment(m, 0, 0).value - 1.0) < 1e-14);
  CHECK(total_mass(m) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("geometric density first moment") {
  const MomentValue v = moment(circle(DensitySpec::geometric(0.5)), 1, 0);
  CHECK(v.converged);
  CHECK(std::abs(v.value - Complex(-0.5, 0.0)) < 1e-12);
  // Fourier coefficients (-a)^{|m|} give c_{j,k} = (-1/2)^{|j-k|}
  for (std::size_t j = 0; j < 6; ++j) {
    for (std::size_t k = 0; k < 6; ++k) {
      const double expected = std::pow(-0.5, std::abs(static_cast<int>(j) - static_cast<int>(k)));
      CHECK(std::abs(moment(circle(DensitySpec::geometric(0.5)), j, k).value - expected) < 1e-12);
    }
  }
}

TEST_CASE("atomic moment with declared tail") {
  const MeasureSpec m = roots_example(40);
  const MomentValue v = moment(m, 1, 1);
  double direct = 0.0;
  for (int n = 1; n <= 40; ++n) direct += std::ldexp(1.0, -n);
  CHECK(v.value.real() == doctest::Approx(direct).epsilon(1e-15));
  CHECK(v.value.real() == doctest::Approx(1.0 - std::ldexp(1.0, -40)).epsilon(1e-15));
  CHECK(v.error_bound == doctest::Approx(std::ldexp(1.0, -40)));

  Complex c21{0.0, 0.0};
  for (int n = 1; n <= 40; ++n) {
    const Complex z = std::polar(1.0, 2.0 * kPi / n);
    c21 += std::ldexp(1.0, -n) * z * z * std::conj(z);
  }
  CHECK(std::abs(moment(m, 2, 1).value - c21) < 1e-15);
}

TEST_CASE("total mass") {
  AtomicMeasure two;
  two.atoms = {{{0.0, 1.0}, 0.25}, {{0.0, -1.0}, 0.75}};
  CHECK(total_mass(two) == doctest::Approx(1.0));

  const double r = 0.3;
  SumMeasure s;
  s.parts = {{lebesgue_circle(), 1.0}, {lebesgue_circle(), r}};
  CHECK(total_mass(s) == doctest::Approx(1.0 + r));
}

TEST_CASE("pushforward") {
  AtomicMeasure one;
  one.atoms = {{{1.0, 0.0}, 1.0}};
  const MeasureSpec shifted = pushforward(one, {1.0, 0.0}, {-1.0, 0.0});
  const auto* a = shifted.as<AtomicMeasure>();
  REQUIRE(a != nullptr);
  REQUIRE(a->atoms.size() == 1);
  CHECK(std::abs(a->atoms[0].point) < 1e-15);
  CHECK(a->atoms[0].weight == 1.0);

  const MeasureSpec moved = pushforward(lebesgue_circle(), {2.0, 0.0}, {0.0, 1.0});
  const auto* c = moved.as<CircleDensity>();
  REQUIRE(c != nullptr);
  CHECK(std::abs(c->center - Complex(0.0, 1.0)) < 1e-15);
  CHECK(c->radius == doctest::Approx(2.0));
  CHECK(total_mass(moved) == doctest::Approx(1.0));

  // Moments of the image match the substituted integrand.
  const MeasureSpec g = circle(DensitySpec::geometric(0.3));
  const Complex alpha{0.5, 0.2};
  const Complex beta{0.1, -0.3};
  const MeasureSpec img = pushforward(g, alpha, beta);
  const auto* gc = g.as<CircleDensity>();
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t k = 0; k < 4; ++k) {
      Complex acc{0.0, 0.0};
      const int nodes = 2048;
      for (int l = 0; l < nodes; ++l) {
        const double t = 2.0 * kPi * l / nodes;
        const Complex w = alpha * gc->curve().point(t) + beta;
        acc += std::pow(w, static_cast<int>(j)) * std::pow(std::conj(w), static_cast<int>(k)) *
               gc->density(t);
      }
      acc /= static_cast<double>(nodes);
      CHECK(std::abs(moment(img, j, k).value - acc) < 1e-12);
    }
  }
}

TEST_CASE("ellipse moments against closed forms") {
  const double a = 1.0;
  const double b = 0.6;
  const MeasureSpec m = CurveDensity{EllipseCurve{{0.0, 0.0}, a, b, 0.0}, DensitySpec::lebesgue()};
  CHECK(std::abs(moment(m, 0, 0).value - 1.0) < 1e-14);
  CHECK(std::abs(moment(m, 1, 0).value) < 1e-14);
  CHECK(std::abs(moment(m, 1, 1).value - (a * a + b * b) / 2.0) < 1e-14);
  CHECK(std::abs(moment(m, 2, 0).value - (a * a - b * b) / 2.0) < 1e-14);

  const auto* cd = m.as<CurveDensity>();
  for (std::size_t j = 0; j < 5; ++j) {
    for (std::size_t k = 0; k < 5; ++k) {
      CHECK(std::abs(moment(m, j, k).value - brute_moment(cd->curve, cd->density, j, k)) < 1e-12);
    }
  }
}

TEST_CASE("rotated and shifted circle") {
  const MeasureSpec m = CircleDensity{DensitySpec::geometric(0.4), 0.7, {0.2, -0.1}, 0.9};
  const auto* c = m.as<CircleDensity>();
  for (std::size_t j = 0; j < 4; ++j) {
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(std::abs(moment(m, j, k).value - brute_moment(c->curve(), c->density, j, k)) < 1e-12);
    }
  }
}

TEST_CASE("sampled density") {
  const DensitySpec g = DensitySpec::geometric(0.5);
  std::vector<double> samples(256);
  for (std::size_t l = 0; l < samples.size(); ++l) {
    samples[l] = g(2.0 * kPi * static_cast<double>(l) / static_cast<double>(samples.size()));
  }
  const MeasureSpec m = circle(DensitySpec::sampled(samples));
  for (std::size_t j = 0; j < 4; ++j) {
    const MomentValue v = moment(m, j, 0);
    CHECK(std::abs(v.value - std::pow(-0.5, static_cast<int>(j))) < 1e-12);
  }

  samples[17] = -0.1;
  CHECK_THROWS_AS(circle(DensitySpec::sampled(samples)).validate(), NegativeDensity);
  CHECK_THROWS_AS(DensitySpec::sampled({1.0, 1.0, 1.0}).validate(), InvalidMeasure);
}

TEST_CASE("quadrature that runs out of nodes is flagged") {
  QuadratureConfig q;
  q.initial_nodes = 8;
  q.max_nodes = 16;
  const MomentValue v = moment(circle(DensitySpec::geometric(0.95)), 0, 0, q);
  CHECK_FALSE(v.converged);
  CHECK(v.error_bound > 0.0);
}

TEST_CASE("invalid measures") {
  CHECK_THROWS_AS(circle(DensitySpec::geometric(1.0)).validate(), InvalidMeasure);
  CHECK_THROWS_AS(MeasureSpec(CircleDensity{DensitySpec::lebesgue(), -1.0, {}, 0.0}).validate(),
                  InvalidMeasure);
  AtomicMeasure neg;
  neg.atoms = {{{0.0, 0.0}, -1.0}};
  CHECK_THROWS_AS(MeasureSpec(neg).validate(), InvalidMeasure);
  CHECK_THROWS_AS(pushforward(lebesgue_circle(), {0.0, 0.0}, {1.0, 0.0}), InvalidArgument);
}

TEST_CASE("moment sections are Hermitian, Toeplitz on circles, and scale") {
  const MeasureSpec g = circle(DensitySpec::geometric(0.5));
  const HermitianSection s = MatrixOracle::moment(g).section(8);
  for (std::size_t j = 0; j <= 8; ++j) {
    for (std::size_t k = 0; k <= 8; ++k) {
      CHECK(s(j, k) == std::conj(s(k, j)));
      if (j > 0 && k > 0) CHECK(std::abs(s(j, k) - s(j - 1, k - 1)) < 1e-13);
    }
  }

  // Scaling the radius by r multiplies c_{j,k} by r^{j+k}.
  const double r = 1.7;
  const HermitianSection big = MatrixOracle::moment(circle(DensitySpec::geometric(0.5), r)).section(6);
  for (std::size_t j = 0; j <= 6; ++j) {
    for (std::size_t k = 0; k <= 6; ++k) {
      CHECK(std::abs(big(j, k) - s(j, k) * std::pow(r, static_cast<double>(j + k))) <
            1e-12 * std::pow(r, static_cast<double>(j + k)));
    }
  }
}

TEST_CASE("moment sections are positive semidefinite") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    AtomicMeasure a;
    for (int i = 0; i < 6; ++i) a.atoms.push_back({{u(rng), u(rng)}, 0.1 + std::abs(u(rng))});
    a.support_radius_bound = 2.0;
    SumMeasure sum;
    sum.parts = {{a, 1.0}, {CurveDensity{EllipseCurve{{u(rng) * 0.2, 0.0}, 1.0, 0.5, u(rng)},
                                         DensitySpec::geometric(0.3 * u(rng))},
                           0.5}};
    const HermitianSection s = MatrixOracle::moment(sum).section(5);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(s.matrix());
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
  }
}

TEST_CASE("atom mass lookup") {
  const MeasureSpec m = roots_example(40);
  CHECK(atom_mass_at(m, std::polar(1.0, 2.0 * kPi / 3.0)) == doctest::Approx(0.125));
  CHECK(atom_mass_at(m, {0.0, 0.0}) == 0.0);
  SumMeasure s;
  s.parts = {{m, 2.0}, {lebesgue_circle(), 0.1}};
  CHECK(atom_mass_at(s, std::polar(1.0, 2.0 * kPi / 3.0)) == doctest::Approx(0.25));
}
