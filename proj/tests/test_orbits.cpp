#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "horocount/orbits.hpp"
#include "support.hpp"

using namespace horocount;

namespace {

// Brute force over integer 2x2 matrices with entries in [-b, b].
std::int64_t stabilizer_bruteforce_2(const Matrix& m, int b) {
  std::int64_t n = 0;
  for (int a = -b; a <= b; ++a)
    for (int c = -b; c <= b; ++c)
      for (int e = -b; e <= b; ++e)
        for (int f = -b; f <= b; ++f) {
          if (a * f - c * e != 1) continue;
          Matrix g(2, 2);
          g << a, c, e, f;
          if ((g.transpose() * m * g - m).cwiseAbs().maxCoeff() < 1e-9) ++n;
        }
  return n / 2;
}

}  // namespace

TEST_CASE("T and R") {
  CHECK(t_of_radius(2, 2) == doctest::Approx(1.96054).epsilon(1e-5));
  CHECK(t_of_radius(3, 1) == 0.0);
  CHECK_THROWS_AS(t_of_radius(2, 0), std::invalid_argument);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int rep = 0; rep < 100; ++rep) {
    int d = 2 + rep % 4;
    double T = u(rng);
    CHECK(std::abs(t_of_radius(d, radius_of_t(d, T)) - T) < 1e-12);
  }
}

TEST_CASE("stabilizer order") {
  CHECK(stabilizer_order(QuadForm::identity(2)) == 2);
  CHECK(stabilizer_order(QuadForm::identity(3)) == 24);
  CHECK(stabilizer_order(QuadForm::identity(4)) == 96);
  Matrix hex(2, 2);
  hex << 1, 0.5, 0.5, 1;
  CHECK(stabilizer_order(QuadForm(hex)) == 3);
  CHECK(stabilizer_bruteforce_2(QuadForm(hex).gram(), 2) == 3);
  CHECK(stabilizer_bruteforce_2(Matrix::Identity(2, 2), 2) == 2);
  std::mt19937_64 rng(8);
  for (int d = 2; d <= 4; ++d)
    for (int rep = 0; rep < 5; ++rep) CHECK(stabilizer_order(testsupport::random_form(rng, d)) == 1);
  // invariant under a change of basis
  Matrix g = testsupport::random_sl_z(rng, 3);
  CHECK(stabilizer_order(QuadForm(g.transpose() * g)) == 24);
  CHECK_THROWS_AS(stabilizer_order(QuadForm::identity(5)), std::invalid_argument);
}

TEST_CASE("chimney and horoball examples") {
  double T = 2 * std::sqrt(2.0) * std::log(2.0);
  auto c = chimney_count(QuadForm::identity(2), T);
  CHECK(c.n1 == 8);
  CHECK(c.count == 2);
  CHECK(c.sigma_q == 2);
  CHECK(c.predicted == doctest::Approx(12 / std::numbers::pi).epsilon(1e-12));
  CHECK(c.predicted == doctest::Approx(3.81972).epsilon(1e-5));
  auto h = horoball_count(QuadForm::identity(2), T);
  CHECK(h.count == 4);
  CHECK(h.predicted == doctest::Approx(c.predicted).epsilon(1e-14));
  // strip asymptotic 3/(pi y) with y = e^{-T/sqrt 2}
  for (double t : {1.0, 5.0, 9.0})
    CHECK(chimney_count(QuadForm::identity(2), t).predicted ==
          doctest::Approx(3 / (std::numbers::pi * std::exp(-t / std::sqrt(2.0)))).epsilon(1e-12));
  CHECK(chimney_count(QuadForm::identity(2), -50).count == 0);
  CHECK(horoball_count(QuadForm::identity(3), -50).count == 0);
  CHECK_THROWS_AS(chimney_count(QuadForm::identity(2), 5, 1000), std::runtime_error);
}

TEST_CASE("dictionary exactness and unimodular invariance") {
  std::mt19937_64 rng(21);
  for (double T : {2.0, 4.5, 7.0, 11.0}) {
    auto q0 = QuadForm::identity(2);
    auto c = chimney_count(q0, T);
    CHECK(alpha_of(2) * c.sigma_q * c.count == c.n1);
    CHECK(2 * horoball_count(q0, T).count == c.n1);
    Matrix g = testsupport::random_sl_z(rng, 2);
    CHECK(chimney_count(QuadForm(g.transpose() * g), T).count == c.count);
  }
  // The cube group fixes the coordinate axes, so N_1 need not split evenly.
  CHECK_THROWS_AS(chimney_count(QuadForm::identity(3), 2.0), std::runtime_error);
  for (int d = 2; d <= 3; ++d) {
    for (double T : {2.0, 4.5, 7.0}) {
      auto q0 = QuadForm::identity(d);
      auto h = horoball_count(q0, T);
      CHECK(2 * h.count == h.n1);
      Matrix g = testsupport::random_sl_z(rng, d);
      CHECK(horoball_count(QuadForm(g.transpose() * g), T).count == h.count);
    }
    auto q = testsupport::random_form(rng, d);
    auto c = chimney_count(q, 5.0, 1);
    CHECK(c.count == c.n1 / alpha_of(d));
  }
}

TEST_CASE("exponent fits") {
  std::vector<std::pair<double, double>> s;
  for (int i = 0; i < 40; ++i) s.push_back({0.5 * i, std::exp(-0.5 * 0.5 * i)});
  auto f = fit_error_exponent(s, false);
  CHECK(std::abs(f.slope + 0.5) < 1e-9);
  CHECK(f.r2 == doctest::Approx(1.0));
  CHECK(f.n_points == 40);
  s.clear();
  for (int i = 0; i < 400; ++i) {
    double t = 0.05 * i;
    s.push_back({t, std::exp(-0.5 * t) * std::cos(t)});
  }
  auto e = fit_error_exponent(s, true);
  CHECK(e.envelope);
  CHECK(e.slope >= -0.55);
  CHECK(e.slope <= -0.45);
  CHECK(e.r2 >= 0);
  CHECK(e.r2 <= 1);
  CHECK_THROWS_AS(fit_error_exponent({{1, 1}, {2, 2}, {3, 1}}, false), std::invalid_argument);
  CHECK_THROWS_AS(fit_error_exponent({{1, 0}, {2, 0}, {3, 0}, {4, 0}}, false), std::invalid_argument);
}

TEST_CASE("theory slopes") {
  CHECK(theory_slope(2).value() == doctest::Approx(-0.48447).epsilon(1e-4));
  CHECK(theory_slope(3).value() == doctest::Approx(-243 / (158 * std::sqrt(6.0))));
  CHECK(theory_slope(4).value() == doctest::Approx(-43 * std::sqrt(3.0) / 104));
  CHECK(theory_slope(7).value() == doctest::Approx(-std::sqrt(6.0 / 7)));
}

TEST_CASE("d=2 chimney error decays") {
  std::vector<std::pair<double, double>> s;
  const double lo = t_of_radius(2, 16), hi = t_of_radius(2, 2048);
  for (int i = 0; i <= 300; ++i) {
    double T = lo + (hi - lo) * i / 300.0;
    s.push_back({T, chimney_count(QuadForm::identity(2), T).rel_error});
  }
  auto f = fit_error_exponent(s, true);
  MESSAGE("d=2 slope " << f.slope);
  CHECK(f.slope <= -0.40);
}

TEST_CASE("d=3 horoball error decays") {
  std::vector<std::pair<double, double>> s;
  const double lo = t_of_radius(3, 8), hi = t_of_radius(3, 64);
  for (int i = 0; i <= 150; ++i) {
    double T = lo + (hi - lo) * i / 150.0;
    s.push_back({T, horoball_count(QuadForm::identity(3), T).rel_error});
  }
  auto f = fit_error_exponent(s, true);
  MESSAGE("d=3 slope " << f.slope);
  CHECK(f.slope <= -0.45);
}
