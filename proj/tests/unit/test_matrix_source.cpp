#include <doctest.h>

#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include "momidx/errors.hpp"
#include "momidx/matrix_source.hpp"
#include "momidx/measures.hpp"

using namespace momidx;

namespace {

MatrixOracle geo_t() {
  return MatrixOracle::toeplitz([](long m) { return Complex(std::pow(-0.5, static_cast<double>(m)), 0.0); },
                                "geometric T");
}

HermitianSection identity(std::size_t n) {
  return HermitianSection::from_lower(
      n, [](std::size_t j, std::size_t k) { return Complex(j == k ? 1.0 : 0.0, 0.0); });
}

}  // namespace

TEST_CASE("toeplitz entries") {
  const MatrixOracle t = geo_t();
  CHECK(t.kind() == OracleKind::ToeplitzSymbol);
  CHECK(t.entry(0, 1) == Complex(-0.5, 0.0));
  CHECK(t.entry(4, 0) == Complex(1.0 / 16.0, 0.0));
  const HermitianSection s = t.section(1);
  CHECK(s(0, 0) == 1.0);
  CHECK(s(0, 1) == -0.5);
  CHECK(s(1, 0) == -0.5);
  CHECK(s(1, 1) == 1.0);
}

TEST_CASE("toeplitz from a coefficient map and from a density") {
  const MatrixOracle m = MatrixOracle::toeplitz(std::map<int, Complex>{{0, 1.25}, {1, {0.0, 0.5}}});
  CHECK(m.entry(1, 0) == Complex(0.0, 0.5));
  CHECK(m.entry(0, 1) == Complex(0.0, -0.5));
  CHECK(m.entry(5, 0) == Complex(0.0, 0.0));

  const MatrixOracle g = MatrixOracle::toeplitz(DensitySpec::geometric(0.5));
  const MatrixOracle t = geo_t();
  for (std::size_t j = 0; j < 8; ++j)
    for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(g.entry(j, k) - t.entry(j, k)) < 1e-15);

  CHECK_THROWS_AS(MatrixOracle::toeplitz(DensitySpec::sampled(std::vector<double>(8, 1.0))), InvalidArgument);
}

TEST_CASE("explicit matrices") {
  const MatrixOracle e = MatrixOracle::explicit_matrix(identity(2));
  CHECK(e.entry(1, 1) == 1.0);
  CHECK(e.max_order() == std::optional<std::size_t>(2));
  CHECK_THROWS_AS(e.entry(3, 0), IndexOutOfRange);
  CHECK_THROWS_AS(e.section(3), IndexOutOfRange);
  CHECK_FALSE(geo_t().max_order().has_value());
}

TEST_CASE("moment oracle") {
  const MatrixOracle leb = MatrixOracle::moment(lebesgue_circle());
  const HermitianSection s = leb.section(3);
  CHECK((s.matrix() - identity(3).matrix()).norm() < 1e-14);
  REQUIRE(leb.measure() != nullptr);
  CHECK(leb.warnings().empty());

  const MeasureSpec g = CircleDensity{DensitySpec::geometric(0.3), 1.2, {0.1, 0.2}, 0.0};
  const MatrixOracle o = MatrixOracle::moment(g);
  for (std::size_t j = 0; j < 5; ++j)
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(o.entry(j, k) - moment(g, j, k).value) < 1e-14);

  // Sections are nested.
  const HermitianSection big = o.section(6);
  const HermitianSection small = o.section(3);
  CHECK((big.leading(3).matrix() - small.matrix()).norm() == 0.0);
}

TEST_CASE("non-converged quadrature is reported") {
  QuadratureConfig q;
  q.initial_nodes = 8;
  q.max_nodes = 16;
  const MatrixOracle o = MatrixOracle::moment(CircleDensity{DensitySpec::geometric(0.95), 1.0, {}, 0.0}, q);
  (void)o.section(2);
  CHECK_FALSE(o.warnings().empty());
  CHECK(o.max_error_bound() > 0.0);
}

TEST_CASE("copies share a cache that is safe across threads") {
  const MatrixOracle o = MatrixOracle::moment(CurveDensity{EllipseCurve{{}, 1.0, 0.6, 0.0}, DensitySpec::lebesgue()});
  std::vector<HermitianSection> out(4);
  std::vector<std::thread> workers;
  for (std::size_t i = 0; i < out.size(); ++i) {
    workers.emplace_back([&, i] { out[i] = MatrixOracle(o).section(10 + i); });
  }
  for (auto& w : workers) w.join();
  for (std::size_t i = 1; i < out.size(); ++i)
    CHECK((out[i].leading(10).matrix() - out[0].matrix()).norm() == 0.0);
}

TEST_CASE("conjugated oracle reproduces the pushforward measure") {
  const MeasureSpec g = CircleDensity{DensitySpec::geometric(0.4), 1.0, {}, 0.0};
  const Complex alpha{0.8, -0.3};
  const Complex beta{0.2, 0.1};
  const MatrixOracle c = MatrixOracle::conjugated(MatrixOracle::moment(g), alpha, beta);
  const MatrixOracle direct = MatrixOracle::moment(pushforward(g, alpha, beta));
  CHECK(c.kind() == OracleKind::Conjugated);
  const HermitianSection a = c.section(12);
  const HermitianSection b = direct.section(12);
  CHECK((a.matrix() - b.matrix()).norm() < 1e-11);
}

TEST_CASE("sum oracle") {
  AtomicMeasure atoms;
  atoms.atoms = {{{1.0, 0.0}, 0.5}, {{0.0, 1.0}, 0.5}};
  const MatrixOracle a = MatrixOracle::moment(atoms);
  const MatrixOracle l = MatrixOracle::moment(lebesgue_circle());
  const MatrixOracle s = MatrixOracle::sum({{a, 1.0}, {l, 0.1}});
  CHECK(s.kind() == OracleKind::Sum);
  CHECK(s.parts().size() == 2);
  for (std::size_t j = 0; j < 5; ++j)
    for (std::size_t k = 0; k < 5; ++k)
      CHECK(std::abs(s.entry(j, k) - (a.entry(j, k) + 0.1 * l.entry(j, k))) < 1e-15);

  CHECK(s.atom_mass_at({0.0, 1.0}) == doctest::Approx(0.5));
  CHECK(s.atom_mass_at({0.0, -1.0}) == 0.0);
  CHECK_THROWS_AS(MatrixOracle::sum({{a, -1.0}}), InvalidArgument);
  CHECK_THROWS_AS(MatrixOracle::sum({}), InvalidArgument);
}

TEST_CASE("atom mass follows conjugation") {
  AtomicMeasure atoms;
  atoms.atoms = {{{0.5, 0.0}, 0.3}, {{-0.5, 0.0}, 0.7}};
  const MatrixOracle c = MatrixOracle::conjugated(MatrixOracle::moment(atoms), {2.0, 0.0}, {0.0, 1.0});
  CHECK(c.atom_mass_at({1.0, 1.0}) == doctest::Approx(0.3));
  CHECK(c.atom_mass_at({0.5, 0.0}) == 0.0);
  CHECK(MatrixOracle::explicit_matrix(identity(2)).atom_mass_at({0.0, 0.0}) == 0.0);
}
