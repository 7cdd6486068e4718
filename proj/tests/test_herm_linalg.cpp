#include <doctest.h>

#include <cmath>

#include "bflab/error.hpp"
#include "bflab/herm_linalg.hpp"
#include "support.hpp"

using namespace bflab::herm;
using testing::Gen;

namespace {

CMatrix diag(std::initializer_list<double> d) {
  RVector v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v[i++] = x;
  return v.cast<cplx>().asDiagonal();
}

// log via Eigen's generic complex Schur path, independent of eigh.
double distance_oracle(const PositiveHermitian& a, const PositiveHermitian& b) {
  Eigen::ComplexEigenSolver<CMatrix> es(a.matrix().inverse() * b.matrix());
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s += std::pow(std::log(es.eigenvalues()[i].real()), 2);
  return 0.5 * std::sqrt(s);
}

}  // namespace

TEST_CASE("hermitian construction rejects asymmetric and non-finite input") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 1.0;
  CHECK_THROWS_AS(HermitianMatrix{a}, bflab::InvalidArgument);
  a(1, 0) = 1.0;
  CHECK_NOTHROW(HermitianMatrix{a});
  a(0, 0) = cplx(0.0, 1e-3);
  CHECK_THROWS_AS(HermitianMatrix{a}, bflab::InvalidArgument);
  a(0, 0) = std::nan("");
  CHECK_THROWS_AS(HermitianMatrix{a}, bflab::InvalidArgument);
  CHECK_THROWS_AS(PositiveHermitian{diag({1.0, -1.0})}, bflab::NumericalError);
  CHECK_THROWS_AS(PositiveHermitian{diag({1.0, 0.0})}, bflab::NumericalError);
}

TEST_CASE("trace_free examples") {
  CHECK(killing_norm(trace_free(HermitianMatrix::identity(3))) < 1e-15);
  const HermitianMatrix t = trace_free(HermitianMatrix(diag({2, 0, 0})));
  CHECK((t.matrix() - diag({4.0 / 3, -2.0 / 3, -2.0 / 3})).norm() < 1e-15);
}

TEST_CASE("norm examples") {
  CHECK(killing_norm(HermitianMatrix::zero(4)) == 0.0);
  CHECK(killing_norm(HermitianMatrix(diag({3, 4}))) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(op_norm(HermitianMatrix(diag({1, -2}))) == doctest::Approx(2.0));
  CHECK(op_norm(HermitianMatrix::identity(5) * 0.2) == doctest::Approx(0.2).epsilon(1e-15));
  Gen g(11);
  for (int trial = 0; trial < 20; ++trial) {
    const HermitianMatrix a = g.hermitian(g.integer(1, 9));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a.matrix());
    CHECK(std::abs(killing_norm(a) - es.eigenvalues().norm()) < 1e-12 * (1 + killing_norm(a)));
    CHECK(op_norm(a) <= killing_norm(a) + 1e-14);
  }
}

TEST_CASE("geodesic_point examples") {
  Gen g(3);
  const PositiveHermitian i2 = PositiveHermitian::identity(2);
  const HermitianMatrix a = g.hermitian(2);
  CHECK((geodesic_point(i2, a, 0.0).matrix() - i2.matrix()).norm() < 1e-15);
  const PositiveHermitian p = geodesic_point(i2, HermitianMatrix(diag({1, 0})), 1.0);
  CHECK((p.matrix() - diag({std::exp(2.0), 1.0})).norm() < 1e-13);
  CHECK_THROWS_AS(geodesic_point(i2, g.hermitian(3), 1.0), bflab::InvalidArgument);
  // e^A H0 e^A is a unit-speed geodesic when A is taken in the H0-orthonormal
  // frame; at H0 = I and for commuting pairs the two frames agree.
  for (int trial = 0; trial < 10; ++trial) {
    const auto n = g.integer(2, 7);
    const HermitianMatrix b = g.hermitian(n, 0.4);
    CHECK(std::abs(distance(PositiveHermitian::identity(n), geodesic_point(PositiveHermitian::identity(n), b, 1.0)) -
                   killing_norm(b)) < 1e-10);
    RVector d(n), e(n);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = std::exp(g.normal()), e[i] = g.normal();
    const PositiveHermitian h0(HermitianMatrix::diagonal(d));
    const HermitianMatrix a = HermitianMatrix::diagonal(e);
    CHECK(std::abs(distance(h0, geodesic_point(h0, a, 1.0)) - killing_norm(a)) < 1e-10);
    // general H0: move the generator into the H0-orthonormal frame
    const PositiveHermitian h1 = g.positive(n);
    const CMatrix r = powm(h1, 0.5).matrix();
    const PositiveHermitian moved(HermitianMatrix::symmetrized(r * expm(b * 2.0).matrix() * r));
    CHECK(std::abs(distance(h1, moved) - killing_norm(b)) < 1e-10);
  }
}

TEST_CASE("distance examples") {
  Gen g(5);
  const PositiveHermitian h = g.positive(4);
  CHECK(distance(h, h) < 1e-12);
  const PositiveHermitian e2a(diag({std::exp(2.0), std::exp(-2.0)}));
  CHECK(distance(PositiveHermitian::identity(2), e2a) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = g.integer(2, 8);
    const PositiveHermitian a = g.positive(n), b = g.positive(n), c = g.positive(n);
    CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-10);
    CHECK(std::abs(distance(a, b) - distance(b, a)) < 1e-10);
    CHECK(std::abs(distance(a, b) - distance_oracle(a, b)) < 1e-9);
  }
}

TEST_CASE("scaled_distance examples") {
  Gen g(8);
  const PositiveHermitian h = g.positive(3);
  CHECK(scaled_distance(h, h, 4, 1) < 1e-12);
  // distance 8 between I and e^{2A} with ||A|| = 8
  const PositiveHermitian far(diag({std::exp(16.0), 1.0}));
  CHECK(distance(PositiveHermitian::identity(2), far) == doctest::Approx(8.0));
  CHECK(scaled_distance(PositiveHermitian::identity(2), far, 4, 1) == doctest::Approx(1.0));
  for (int trial = 0; trial < 10; ++trial) {
    const PositiveHermitian a = g.positive(5), b = g.positive(5);
    const int k = g.integer(1, 40);
    CHECK(unscale_distance(scaled_distance(a, b, k, 1), k, 1) == doctest::Approx(distance(a, b)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(scaled_distance(h, h, 0, 1), bflab::InvalidArgument);
}

TEST_CASE("property: tr(FGF) <= |F|^2 |G|_op for positive semidefinite G") {
  Gen g(21);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = g.integer(1, 12);
    const HermitianMatrix f = g.hermitian(n);
    const CMatrix c = g.complex_matrix(n).leftCols(g.integer(1, static_cast<int>(n)));
    const HermitianMatrix gm = HermitianMatrix::symmetrized(c * c.adjoint());
    const double lhs = (f.matrix() * gm.matrix() * f.matrix()).trace().real();
    CHECK(lhs <= std::pow(killing_norm(f), 2) * op_norm(gm) * (1 + 1e-12));
  }
}

TEST_CASE("property: trace_free is an idempotent contraction") {
  Gen g(22);
  for (int trial = 0; trial < 50; ++trial) {
    const HermitianMatrix a = g.hermitian(g.integer(1, 10), g.uniform(0.1, 10.0));
    const HermitianMatrix t = trace_free(a);
    CHECK(std::abs(t.trace()) <= 1e-12 * killing_norm(a));
    CHECK(killing_norm(trace_free(t) - t) <= 1e-14 * (1 + killing_norm(a)));
    CHECK(killing_norm(t) <= killing_norm(a) + 1e-14);
  }
}

TEST_CASE("property: distance is congruence invariant") {
  Gen g(23);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = g.integer(2, 8);
    const PositiveHermitian a = g.positive(n), b = g.positive(n);
    const CMatrix p = g.complex_matrix(n) + CMatrix::Identity(n, n) * 2.0;
    const PositiveHermitian pa(HermitianMatrix::symmetrized(p.adjoint() * a.matrix() * p));
    const PositiveHermitian pb(HermitianMatrix::symmetrized(p.adjoint() * b.matrix() * p));
    CHECK(std::abs(distance(pa, pb) - distance(a, b)) < 1e-9);
  }
}

TEST_CASE("property: geodesics form a one-parameter group") {
  Gen g(24);
  for (int trial = 0; trial < 30; ++trial) {
    const auto n = g.integer(1, 8);
    const PositiveHermitian h0 = g.positive(n);
    const HermitianMatrix a = g.hermitian(n, 0.3);
    const double s = g.uniform(-1, 1), t = g.uniform(-1, 1);
    const CMatrix once = geodesic_point(h0, a, s + t).matrix();
    const CMatrix twice = geodesic_point(geodesic_point(h0, a, s), a, t).matrix();
    CHECK((once - twice).norm() <= 1e-10 * once.norm());
  }
}

TEST_CASE("expm and logm are inverse and logm fails loudly on degeneracy") {
  Gen g(25);
  for (int trial = 0; trial < 20; ++trial) {
    const HermitianMatrix a = g.hermitian(g.integer(1, 9));
    const HermitianMatrix back = logm(PositiveHermitian(expm(a)));
    CHECK(killing_norm(back - a) < 1e-11 * (1 + killing_norm(a)));
  }
  CHECK_THROWS_AS(logm(PositiveHermitian(diag({1.0, 1e-15}))), bflab::NumericalError);
  const PositiveHermitian h = g.positive(4);
  CHECK((powm(powm(h, 0.5), 2.0).matrix() - h.matrix()).norm() < 1e-11 * h.matrix().norm());
}
