#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "horocount/quadform.hpp"
#include "support.hpp"

using namespace horocount;

namespace {

Matrix gram_of(const GroupElement& g) { return g.mat().transpose() * g.mat(); }

double max_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("construction normalizes and validates") {
  Matrix m(2, 2);
  m << 4, 2, 2, 4;
  QuadForm q(m);
  CHECK(q.gram().determinant() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(max_diff(q.chol() * q.chol().transpose(), q.gram()) < 1e-14);

  Matrix bad(2, 2);
  bad << 1, 0.5, 0.4, 1;
  CHECK_THROWS_AS(QuadForm{bad}, std::invalid_argument);
  Matrix indef(2, 2);
  indef << 1, 2, 2, 1;
  CHECK_THROWS_AS(QuadForm{indef}, std::invalid_argument);
  CHECK_THROWS_AS(QuadForm{Matrix::Identity(1, 1)}, std::invalid_argument);
  Matrix sing(2, 2);
  sing << 1, 1, 1, 1;
  CHECK_THROWS_AS(QuadForm{sing}, std::invalid_argument);
}

TEST_CASE("act: examples") {
  for (int d = 2; d <= 5; ++d) {
    QuadForm q0 = QuadForm::identity(d);
    CHECK(max_diff(act(q0, GroupElement::identity(d)).gram(), q0.gram()) < 1e-15);
    double t = 0.7;
    auto [lambda, mu] = rates(d);
    Matrix expect = Matrix::Identity(d, d) * std::exp(lambda * t);
    expect(d - 1, d - 1) = std::exp(-mu * t);
    CHECK(max_diff(act(q0, geodesic_r(d, t)).gram(), expect) < 1e-13);
  }
  double x = 0.37;
  Matrix n(2, 2);
  n << 1, 0, x, 1;
  Matrix expect(2, 2);
  expect << 1 + x * x, x, x, 1;
  CHECK(max_diff(act(QuadForm::identity(2), GroupElement(n)).gram(), expect) < 1e-15);
  CHECK_THROWS(act(QuadForm::identity(2), GroupElement::identity(3)));
}

TEST_CASE("act: right action, evaluation and rotation invariance") {
  std::mt19937_64 rng(11);
  for (int d = 2; d <= 4; ++d) {
    for (int rep = 0; rep < 20; ++rep) {
      QuadForm q = testsupport::random_form(rng, d);
      GroupElement g = testsupport::random_sl(rng, d), h = testsupport::random_sl(rng, d);
      CHECK(max_diff(act(act(q, g), h).gram(), act(q, g * h).gram()) < 1e-9);
      Vector v = testsupport::random_matrix(rng, d).col(0);
      CHECK(act(q, g)(v) == doctest::Approx(q(g.mat() * v)).epsilon(1e-10));
      GroupElement k(testsupport::random_rotation(rng, d));
      CHECK(max_diff(act(QuadForm::identity(d), k).gram(), Matrix::Identity(d, d)) < 1e-12);
    }
  }
}

TEST_CASE("geodesics") {
  CHECK(max_diff(geodesic_r(3, 0).mat(), Matrix::Identity(3, 3)) == 0.0);
  Matrix a1 = geodesic_r(2, 1).mat();
  CHECK(a1(0, 0) == doctest::Approx(std::exp(1 / (2 * std::sqrt(2.0)))).epsilon(1e-15));
  CHECK(a1(1, 1) == doctest::Approx(std::exp(-1 / (2 * std::sqrt(2.0)))).epsilon(1e-15));
  CHECK(geodesic_rho(3, 5).mat().determinant() == doctest::Approx(1.0).epsilon(1e-12));
  auto [lambda, mu] = rates(4);
  CHECK(lambda == doctest::Approx(1 / std::sqrt(12.0)));
  CHECK(mu == doctest::Approx(3 / std::sqrt(12.0)));
}

TEST_CASE("Busemann functions") {
  Matrix m(2, 2);
  m << 2, 0, 0, 0.5;
  CHECK(busemann_r(QuadForm(m)) == doctest::Approx(-0.98026).epsilon(1e-5));
  CHECK(busemann_r(QuadForm::identity(4)) == 0.0);
  CHECK(busemann_rho(QuadForm::identity(4)) == 0.0);
  Matrix m3 = Matrix::Zero(3, 3);
  m3.diagonal() << 4, 1, 0.25;
  CHECK(busemann_rho(QuadForm(m3)) == doctest::Approx(-1.69786).epsilon(1e-5));

  for (int d = 2; d <= 5; ++d) {
    for (double t = -10; t <= 10; t += 0.5) {
      QuadForm q0 = QuadForm::identity(d);
      CHECK(std::abs(busemann_r(act(q0, geodesic_r(d, t))) + t) < 1e-12);
      CHECK(std::abs(busemann_rho(act(q0, geodesic_rho(d, t))) + t) < 1e-12);
    }
  }
  // cocycle for a diagonal form
  Matrix diag = Matrix::Zero(3, 3);
  diag.diagonal() << 2, 0.8, 0.625;
  QuadForm q(diag);
  CHECK(busemann_r(act(q, geodesic_r(3, 1.3))) == doctest::Approx(busemann_r(q) - 1.3).epsilon(1e-12));
}

TEST_CASE("Iwasawa coordinates") {
  IwasawaCoord c = iwasawa_decompose(GroupElement::identity(3));
  CHECK(std::abs(c.t) < 1e-15);
  for (double a : c.aprime) CHECK(std::abs(a) < 1e-15);
  CHECK(c.n.cwiseAbs().maxCoeff() < 1e-15);

  for (int d = 2; d <= 4; ++d) {
    IwasawaCoord z;
    z.t = 1.7;
    z.aprime.assign(d - 1, 0.0);
    z.n = Matrix::Zero(d, d);
    CHECK(max_diff(iwasawa_compose(z).mat(), geodesic_r(d, -1.7).mat()) < 1e-13);
  }

  std::mt19937_64 rng(5);
  for (int d = 2; d <= 4; ++d) {
    for (int rep = 0; rep < 100; ++rep) {
      GroupElement g = testsupport::random_sl(rng, d);
      IwasawaCoord cc = iwasawa_decompose(g);
      double s = 0;
      for (double a : cc.aprime) s += a;
      CHECK(std::abs(s) < 1e-12);
      CHECK(max_diff(gram_of(iwasawa_compose(cc)), gram_of(g)) < 1e-9);
      // Busemann level equals t
      Matrix m = gram_of(g);
      CHECK(busemann_r(QuadForm(m)) == doctest::Approx(cc.t).epsilon(1e-10));
    }
  }
}

TEST_CASE("phi_t") {
  QuadForm q0 = QuadForm::identity(3);
  CHECK(max_diff(phi_t(q0, 0).gram(), q0.gram()) < 1e-13);
  double x = -0.31;
  Matrix n(2, 2);
  n << 1, 0, x, 1;
  QuadForm q = act(QuadForm::identity(2), GroupElement(n));
  CHECK(std::abs(busemann_r(q)) < 1e-15);
  for (double t : {-3.0, 0.5, 4.0}) {
    QuadForm p = phi_t(q, t);
    CHECK(busemann_r(p) == doctest::Approx(t).epsilon(1e-12));
    CHECK(p.gram()(1, 1) == doctest::Approx(std::exp(t / std::sqrt(2.0))).epsilon(1e-12));
  }
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 10; ++rep) {
    QuadForm r = testsupport::random_form(rng, 3);
    CHECK(busemann_r(phi_t(r, 2.5)) == doctest::Approx(busemann_r(r) + 2.5).epsilon(1e-10));
  }
}

TEST_CASE("chi_d") {
  CHECK(chi_d(GroupElement::identity(3)) == 1.0);
  CHECK(chi_d(geodesic_r(2, -1)) == doctest::Approx(2.02812).epsilon(1e-5));
  for (int d = 2; d <= 6; ++d)
    for (double t = -10; t <= 10; t += 1.25) {
      double expect = std::exp(t * std::sqrt(double(d - 1) * d) / 2);
      CHECK(std::abs(chi_d(geodesic_r(d, -t)) / expect - 1) < 1e-12);
    }
  GroupElement a = geodesic_r(3, 0.4), b = geodesic_rho(3, -1.1);
  CHECK(chi_d(a * b) == doctest::Approx(chi_d(a) * chi_d(b)).epsilon(1e-13));
  Matrix n = Matrix::Identity(2, 2);
  n(1, 0) = 0.5;
  CHECK_THROWS_AS(chi_d(GroupElement(n)), std::invalid_argument);
}

TEST_CASE("zeta against an independent partial sum") {
  for (int s = 2; s <= 8; ++s) {
    // 10^6 terms, smallest first, plus the integral bracket for the rest.
    const long n = 1000000;
    double head = 0;
    for (long k = n; k >= 1; --k) head += std::pow(double(k), -s);
    double hi = std::pow(double(n), 1.0 - s) / (s - 1);
    double lo = std::pow(double(n + 1), 1.0 - s) / (s - 1);
    double z = zeta(s);
    CHECK(z >= head + lo - 1e-15);
    CHECK(z <= head + hi + 1e-15);
  }
  CHECK(zeta(2) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6).epsilon(1e-15));
  CHECK(zeta(4) == doctest::Approx(std::pow(std::numbers::pi, 4) / 90).epsilon(1e-15));
  CHECK(zeta(3) == doctest::Approx(1.2020569031595942).epsilon(1e-15));
  CHECK_THROWS(zeta(1));
}

TEST_CASE("constants") {
  Constants c = constants(2);
  const double pi = std::numbers::pi;
  CHECK(c.alpha_d == 2);
  CHECK(constants(3).alpha_d == 1);
  CHECK(c.omega_d == doctest::Approx(pi));
  CHECK(constants(3).omega_d == doctest::Approx(4 * pi / 3));
  CHECK(c.C_d == doctest::Approx(2 * std::sqrt(pi / 3)).epsilon(1e-14));
  CHECK(c.C_d == doctest::Approx(2.04665).epsilon(1e-5));
  CHECK(c.kappa_over_vol == doctest::Approx(3 / pi).epsilon(1e-14));
  REQUIRE(c.kappa_d.has_value());
  CHECK(std::abs(*c.kappa_d - 2.0) < 1e-12);
  // second route: alpha(2) vol(F_0(0)) / sqrt((d-1)d) with vol(F_0(0)) = sqrt(2)
  CHECK(std::abs(*c.kappa_d - 2 * std::sqrt(2.0) / std::sqrt(2.0)) < 1e-12);
  CHECK(c.T_d == doctest::Approx(0.33320).epsilon(1e-4));
  CHECK(c.exponent_thm12 == doctest::Approx(std::sqrt(2.0) / 8));
  CHECK(c.exponent_thm11 == doctest::Approx(std::sqrt(2.0) / 4));
  REQUIRE(c.exponent_rh.has_value());
  CHECK(*c.exponent_rh == doctest::Approx(3 * std::sqrt(2.0) / 8));
  Constants c3 = constants(3);
  CHECK_FALSE(c3.kappa_d.has_value());
  CHECK_FALSE(c3.exponent_rh.has_value());
  CHECK(c3.C_d == doctest::Approx(2 * std::sqrt(2 * zeta(3) / (6 * 4 * pi / 3))));
  CHECK(c3.exponent_edwards == doctest::Approx(0.25 * std::sqrt(1.5)));
  CHECK(c3.lambda * 2 == doctest::Approx(c3.mu));
  CHECK_THROWS(constants(1));
}
