#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "horocount/equidist.hpp"
#include "support.hpp"

using namespace horocount;

namespace {

const double pi = std::numbers::pi;

int euler_phi(int n) {
  int r = n;
  for (int p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    while (n % p == 0) n /= p;
    r -= r / p;
  }
  if (n > 1) r -= r / n;
  return r;
}

// 5-point Gauss-Legendre on [a, b]; exact for the polynomial pieces used here.
template <class F>
double gauss5(F f, double a, double b) {
  static const double x[] = {0.0, 0.5384693101056831, 0.9061798459386640};
  static const double w[] = {0.5688888888888889, 0.4786286704993665, 0.2369268850561891};
  double m = 0.5 * (a + b), r = 0.5 * (b - a);
  double s = w[0] * f(m);
  for (int i = 1; i < 3; ++i) s += w[i] * (f(m - r * x[i]) + f(m + r * x[i]));
  return r * s;
}

// int_R h(a + z^2) dz
double line_integral(const RadialProfile& h, double a) {
  const double s = h.support_end;
  if (a >= s) return 0.0;
  if (h.kind == RadialProfile::Kind::Indicator) return 2 * std::sqrt(s - a);
  auto f = [&](double z) { return h(a + z * z); };
  double zs = std::sqrt(s - a);
  if (a >= h.plateau) return 2 * gauss5(f, 0, zs);
  double zp = std::sqrt(h.plateau - a);
  return 2 * (zp + gauss5(f, zp, zs));
}

// Horocycle average for d = 2 summed fiberwise: vectors with first coordinate n
// contribute phi(n)/n times a line integral.
double horocycle_closed_form(double t, const RadialProfile& h) {
  const double X = std::exp(t / (2 * std::numbers::sqrt2));
  double sum = 0;
  const int top = static_cast<int>(std::floor(X * std::sqrt(h.support_end)));
  for (int n = top; n >= 1; --n) sum += double(euler_phi(n)) / n * line_integral(h, (n / X) * (n / X));
  return 2 * h(X * X) + 2 / X * sum;
}

// Radial integral by composite Simpson in u.
double radial_integral_numeric(const RadialProfile& h, int d) {
  const int n = 200000;
  const double s = h.support_end, a = d / 2.0;
  double acc = 0;
  for (int i = 0; i <= n; ++i) {
    double u = s * i / n;
    double w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    acc += w * h(u) * std::pow(u, a - 1);
  }
  return d * unit_ball_volume(d) / 2 * acc * s / n / 3;
}

}  // namespace

TEST_CASE("profiles") {
  auto ind = RadialProfile::indicator(2.0);
  CHECK(ind(2.0) == 1.0);
  CHECK(ind(2.0000001) == 0.0);
  CHECK(ind.integral(2) == doctest::Approx(2 * pi));
  CHECK(ind.integral(3) == doctest::Approx(4 * pi / 3 * std::pow(2.0, 1.5)));
  for (double p : {0.0, 0.3, 0.9}) {
    auto b = RadialProfile::bump(1.5, p);
    CHECK(b(p) == 1.0);
    CHECK(b(1.5) == doctest::Approx(0.0));
    CHECK(b(0.5 * (p + 1.5)) == doctest::Approx(0.5));
    for (int d = 2; d <= 4; ++d) CHECK(b.integral(d) == doctest::Approx(radial_integral_numeric(b, d)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(RadialProfile::bump(1, 1), std::invalid_argument);
  CHECK_THROWS_AS(RadialProfile::indicator(0), std::invalid_argument);
}

TEST_CASE("test function evaluation") {
  CHECK(eval_test_function(QuadForm::identity(2), RadialProfile::indicator(1)) == 4);
  for (int d = 2; d <= 4; ++d) CHECK(eval_test_function(QuadForm::identity(d), RadialProfile::indicator(0.5)) == 0);
  std::mt19937_64 rng(3);
  auto h = RadialProfile::indicator(3.0);
  Matrix m(2, 2);
  m << 1.3, 0.4, 0.4, 1.0;
  QuadForm q(m);
  double base = eval_test_function(q, h);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix g = testsupport::random_sl_z(rng, 2);
    CHECK(eval_test_function(QuadForm(g.transpose() * q.gram() * g), h) == base);
  }
}

TEST_CASE("space averages") {
  CHECK(space_average(RadialProfile::indicator(1), 2) == doctest::Approx(6 / pi).epsilon(1e-14));
  CHECK(space_average(RadialProfile::indicator(1), 2) == doctest::Approx(1.90986).epsilon(1e-5));
  CHECK(space_average(RadialProfile::indicator(1), 3) == doctest::Approx(4 * pi / 3 / 1.2020569031595942).epsilon(1e-14));
  CHECK(space_average(RadialProfile::indicator(1), 3) == doctest::Approx(3.48469).epsilon(1e-5));
  CHECK(space_average(RadialProfile::indicator(1e-12), 3) < 1e-17);
}

TEST_CASE("fiber integrals") {
  auto id1 = GroupElement::identity(1);
  CHECK(fiber_integral(0, id1, RadialProfile::indicator(1), 27) == 2.0);
  CHECK(fiber_integral(0, id1, RadialProfile::indicator(0.5), 27) == 0.0);
  CHECK_THROWS_AS(fiber_integral(0, id1, RadialProfile::indicator(1), 4), std::invalid_argument);
  auto b = RadialProfile::bump(1);
  CHECK(fiber_integral(3.1, id1, b, 81) == fiber_integral_serial(3.1, id1, b, 81));
  auto id2 = GroupElement::identity(2);
  double a64 = fiber_integral(0, id2, b, 64), a128 = fiber_integral(0, id2, b, 128);
  CHECK(std::abs(a64 - a128) < 1e-2);
}

TEST_CASE("d=2 averages against the fiberwise closed form") {
  auto ind = RadialProfile::indicator(1);
  QuadratureSpec q;
  auto a0 = horosphere_average(2, 0, ind, q);
  CHECK(a0.value == 2.0);
  CHECK(a0.err == doctest::Approx(2 - 6 / pi).epsilon(1e-12));
  CHECK(a0.err == doctest::Approx(0.09014).epsilon(1e-4));
  for (auto h : {RadialProfile::bump(1), RadialProfile::bump(1.7, 0.4), RadialProfile::indicator(1)}) {
    q.torus_resolution = h.kind == RadialProfile::Kind::Bump ? 24 : 200;
    for (double t : {0.5, 2.0, 4.7, 8.3, 11.0, 13.5}) {
      auto a = horosphere_average(2, t, h, q);
      double exact = horocycle_closed_form(t, h);
      MESSAGE("t=" << t << " grid=" << a.torus_grid << " diff=" << a.value - exact << " est=" << a.quad_error_estimate
                   << " err=" << a.err);
      if (h.kind == RadialProfile::Kind::Bump) {
        CHECK(std::abs(a.value - exact) <= 3 * a.quad_error_estimate + 1e-12);
      } else {
        // each of the phi(n) covered intervals per period moves by at most 1/grid at each end
        double jumps = 0;
        for (int n = 1; n <= std::exp(t / (2 * std::numbers::sqrt2)); ++n) jumps += 4 * euler_phi(n);
        CHECK(std::abs(a.value - exact) <= jumps / a.torus_grid);
      }
      CHECK(a.converged);
    }
  }
  q.torus_resolution = 200;
  auto a12 = horosphere_average(2, 12, ind, q);
  CHECK(std::abs(a12.err) < 0.05);
}

TEST_CASE("d=3 smoke") {
  QuadratureSpec q;
  auto a = horosphere_average(3, 0, RadialProfile::bump(1), q);
  CHECK(std::isfinite(a.value));
  CHECK(a.quad_error_estimate >= 0);
  MESSAGE("d=3 t=0 value " << a.value << " est " << a.quad_error_estimate << " target " << a.target);
  auto b = horosphere_average(3, 2.0, RadialProfile::bump(1), q);
  CHECK(std::isfinite(b.value));
  CHECK(b.converged);
  MESSAGE("d=3 t=2 value " << b.value << " est " << b.quad_error_estimate << " err " << b.err);
  CHECK_THROWS_AS(horosphere_average(4, 0, RadialProfile::bump(1), q), std::invalid_argument);
  q.refinement_factor = 2;
  CHECK_THROWS_AS(horosphere_average(2, 0, RadialProfile::bump(1), q), std::invalid_argument);
}

TEST_CASE("truncation") {
  QuadratureSpec q;
  auto r = truncated_average(2.0, 5.0, RadialProfile::bump(1), q);
  CHECK(r.difference == 0.0);
  CHECK(r.theta_alpha == doctest::Approx(5 / std::numbers::sqrt2));
  CHECK_THROWS_AS(truncated_average(2.0, 0.5, RadialProfile::bump(1), q), std::invalid_argument);
  auto s = truncated_average(2.0, 1.0, RadialProfile::bump(1), q);
  CHECK(s.difference >= 0);
  CHECK(s.truncated.cutoff_height == doctest::Approx(std::exp(2 / std::numbers::sqrt2)));
}

TEST_CASE("shortest primitive value") {
  for (int d = 2; d <= 4; ++d) {
    CHECK(shortest_primitive_value(QuadForm::identity(d)) == 1.0);
    for (double t : {0.5, 2.0, 5.0}) {
      double v = shortest_primitive_value(act(QuadForm::identity(d), geodesic_r(d, t)));
      CHECK(v == doctest::Approx(std::exp(-rates(d).mu * t)).epsilon(1e-12));
    }
  }
  std::mt19937_64 rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    int d = 2 + rep % 3;
    QuadForm q = testsupport::random_form(rng, d);
    Matrix g = testsupport::random_sl_z(rng, d);
    double a = shortest_primitive_value(q);
    CHECK(shortest_primitive_value(QuadForm(g.transpose() * q.gram() * g)) == doctest::Approx(a).epsilon(1e-12));
    // brute force over a box
    double best = 1e300;
    for_each_point(q, q.gram().diagonal().minCoeff(), [&](std::span<const std::int64_t> v, double val) {
      if (gcd_of(v) == 1 && val < best) best = val;
    });
    CHECK(a == doctest::Approx(best).epsilon(1e-14));
  }
}

TEST_CASE("long unipotent orbits in the cusp") {
  const double t = 8, alpha = std::sqrt(3.0) / 2;
  double y = 4 * std::exp(alpha * t / std::numbers::sqrt2);
  Matrix h(2, 2);
  h << std::sqrt(y), 0, 0, 1 / std::sqrt(y);
  CHECK(cusp_orbit_check(GroupElement(h), t, 0).inside);
  CHECK_FALSE(cusp_orbit_check(GroupElement::identity(2), t, -5).inside);
  CHECK(cusp_orbit_check(GroupElement::identity(2), 0, 10).inside);
  CHECK_THROWS_AS(cusp_orbit_check(GroupElement::identity(3), 0, 0), std::invalid_argument);
}

TEST_CASE("torus volume scaling") {
  for (int d = 2; d <= 4; ++d)
    for (double t : {-2.0, 1.0, 3.5}) {
      auto r = torus_volume_scaling(d, t, 15);
      CHECK(r.rel_diff <= r.quad_error + 1e-10);
    }
}

TEST_CASE("good-t locator") {
  LocatorParams p{1, 0.5, 0.1, 1, 1};
  CHECK(p.t0() == doctest::Approx(10 * std::log(1.2)).epsilon(1e-12));
  CHECK(p.t0() == doctest::Approx(1.82322).epsilon(1e-5));
  std::vector<std::pair<double, double>> g, zero;
  for (double t = 0; t <= 25; t += 1e-3) {
    g.push_back({t, 0.5 * std::exp(-0.5 * t) * std::cos(std::exp(0.5 * t))});
    zero.push_back({t, 0.0});
  }
  auto hits = good_t_locator(g, p);
  auto gaps = check_windows(hits, p.t0(), 20, 100, p);
  CHECK(gaps.ok());
  CHECK(good_t_locator(zero, p).size() == zero.size());
  LocatorParams huge = p;
  huge.kappa = 1e6;
  huge.ctilde = 1e6;
  CHECK(good_t_locator(g, huge).size() == g.size());
  LocatorParams tiny = p;
  tiny.kappa = 1e-6;
  auto few = good_t_locator(g, tiny);
  CHECK_FALSE(check_windows(few, p.t0(), 20, 100, p).ok());
  LocatorParams bad = p;
  bad.beta = 2;
  CHECK_THROWS_AS(good_t_locator(g, bad), std::invalid_argument);
  std::vector<std::pair<double, double>> sparse{{0, 1}, {10, 1}};
  CHECK_THROWS_AS(good_t_locator(sparse, p), std::invalid_argument);
}

TEST_CASE("pointwise bound report") {
  std::vector<HoroAverage> zero;
  for (double t = 0; t <= 10; t += 0.5) zero.push_back({t, 0, 0, 0, 0});
  CHECK(check_thm12_bound(zero, 0, 0, 2).passed);
  QuadratureSpec q;
  q.torus_resolution = 24;
  auto h = RadialProfile::bump(1);
  std::vector<HoroAverage> s;
  for (double t = 0.5; t <= 8; t += 0.5) s.push_back(horosphere_average(2, t, h, q));
  double grad = lipschitz_along_flow(2, h, {0.5, 1.5, 3.0}, q);
  CHECK(grad > 0);
  auto ok = check_thm12_bound(s, 1.0, grad, 2);
  CHECK(ok.passed);
  for (auto& a : s) a.err *= 100, a.quad_error_estimate = 0;
  CHECK_FALSE(check_thm12_bound(s, 1.0, grad / 10, 2).passed);
  CHECK_THROWS_AS(check_thm12_bound(s, -1, grad, 2), std::invalid_argument);
}

TEST_CASE("integrated bound") {
  QuadratureSpec q;
  q.torus_resolution = 24;
  auto rep = integrated_error_check(2, RadialProfile::bump(1), {2.0, 4.0}, 1.0, q, 0.05);
  REQUIRE(rep.size() == 2);
  for (auto& r : rep) {
    MESSAGE("T=" << r.T << " lhs=" << r.lhs << " rhs=" << r.rhs << " budget=" << r.budget);
    CHECK(r.passed);
  }
}
