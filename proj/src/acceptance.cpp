#include "horocount/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>

#include "horocount/equidist.hpp"
#include "horocount/latcount.hpp"
#include "horocount/moebius.hpp"
#include "horocount/orbits.hpp"
#include "horocount/randlat.hpp"

namespace horocount {

namespace {

struct Case {
  QuadForm form;
  double R;
};

QuadForm random_form(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0.0, 0.6);
  for (;;) {
    Matrix m = Matrix::Identity(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) += n(rng);
    if (m.determinant() < 0.2) continue;
    Matrix g = m.transpose() * m;
    return QuadForm(0.5 * (g + g.transpose()));
  }
}

bool near_boundary(const QuadForm& q, double R) {
  const double b = R * R;
  bool hit = false;
  for_each_point(q, b * (1 + 1e-8), [&](std::span<const std::int64_t>, double v) {
    if (std::abs(v - b) <= 1e-9 * b) hit = true;
  });
  return hit;
}

double max_radius(int d) { return d == 2 ? 20.0 : d == 3 ? 12.0 : 7.0; }

std::vector<Case> counting_corpus(std::uint64_t seed) {
  std::vector<Case> out;
  auto rng = stream(seed, 1);
  for (int d = 2; d <= 4; ++d) {
    std::uniform_real_distribution<double> ur(2.0, max_radius(d));
    for (int k = 0; k < 50; ++k) {
      QuadForm q = random_form(rng, d);
      double R = ur(rng);
      while (near_boundary(q, R)) R = ur(rng);
      out.push_back({q, R});
    }
  }
  return out;
}

// Plain scan of the bounding box of the ellipsoid.
std::pair<std::int64_t, std::int64_t> box_scan(const QuadForm& q, double R) {
  const int d = q.dim();
  const Matrix& m = q.gram();
  const Matrix inv = m.inverse();
  const double b = R * R;
  std::vector<std::int64_t> ext(d), v(d);
  for (int j = 0; j < d; ++j) {
    ext[j] = static_cast<std::int64_t>(std::floor(std::sqrt(b * inv(j, j)))) + 1;
    v[j] = -ext[j];
  }
  std::int64_t full = 0, prim = 0;
  Vector x(d);
  for (;;) {
    for (int j = 0; j < d; ++j) x(j) = double(v[j]);
    if (x.dot(m * x) <= b) {
      ++full;
      if (gcd_of(v) == 1) ++prim;
    }
    int j = 0;
    while (j < d && v[j] == ext[j]) v[j] = -ext[j], ++j;
    if (j == d) break;
    ++v[j];
  }
  return {full, prim};
}

std::string c1(const AcceptanceOptions& o, bool& ok) {
  auto corpus = counting_corpus(o.seed);
  int bad = 0;
  for (auto& c : corpus) {
    auto [full, prim] = box_scan(c.form, c.R);
    EllipsoidSpec s(c.form, c.R);
    if (*count_full(s, CountMode::Float, o.threads).n0 != full) ++bad;
    if (*count_primitive_direct(s).n1 != prim) ++bad;
  }
  ok = bad == 0;
  std::ostringstream os;
  os << corpus.size() << " forms (d=2,3,4; R<=20), mismatches " << bad;
  return os.str();
}

std::string c2(const AcceptanceOptions& o, bool& ok) {
  auto corpus = counting_corpus(o.seed);
  int bad = 0;
  for (auto& c : corpus) {
    EllipsoidSpec s(c.form, c.R);
    if (*count_primitive_moebius(s, CountMode::Float, o.threads).n1 != *count_primitive_direct(s).n1) ++bad;
  }
  auto rng = stream(o.seed, 2);
  std::uniform_int_distribution<int> coef(-2, 2), idx(0, 3);
  int shells = 0, shell_bad = 0;
  for (int d = 2; d <= 4; ++d) {
    for (int rep = 0; rep < 2; ++rep) {
      Matrix g = Matrix::Identity(d, d);
      if (rep == 1) {
        for (int s = 0; s < 6; ++s) {
          int i = idx(rng) % d, j = idx(rng) % d;
          if (i == j) continue;
          Matrix e = Matrix::Identity(d, d);
          e(i, j) = coef(rng);
          g = g * e;
        }
      }
      auto r = verify_inversion(EllipsoidSpec::exact(QuadForm(g.transpose() * g), 400));
      ++shells;
      if (!r.ok || r.levels_checked != 400) ++shell_bad;
    }
  }
  ok = bad == 0 && shell_bad == 0;
  std::ostringstream os;
  os << "moebius vs direct mismatches " << bad << "/" << corpus.size() << "; shell identities to R^2=400 failed "
     << shell_bad << "/" << shells;
  return os.str();
}

std::string c3(const AcceptanceOptions& o, bool& ok) {
  const double pi = std::numbers::pi;
  auto n2 = *count_primitive_moebius(EllipsoidSpec(QuadForm::identity(2), 2000), CountMode::Float, o.threads).n1;
  double r2 = std::abs(double(n2) * zeta(2) / (pi * 2000.0 * 2000.0) - 1);
  auto n3 = *count_primitive_moebius(EllipsoidSpec(QuadForm::identity(3), 200), CountMode::Float, o.threads).n1;
  double r3 = std::abs(double(n3) * zeta(3) / (4 * pi / 3 * 200.0 * 200.0 * 200.0) - 1);
  ok = r2 <= 5e-3 && r3 <= 1e-2;
  std::ostringstream os;
  os << "d=2 R=2000 N1=" << n2 << " rel " << r2 << "; d=3 R=200 N1=" << n3 << " rel " << r3;
  return os.str();
}

std::string c4(const AcceptanceOptions& o, bool& ok) {
  auto sweep = [&](int d, double r_lo, double r_hi, int steps, bool horoball) {
    std::vector<std::pair<double, double>> s;
    const double lo = t_of_radius(d, r_lo), hi = t_of_radius(d, r_hi);
    for (int i = 0; i <= steps; ++i) {
      double T = lo + (hi - lo) * i / steps;
      auto c = horoball ? horoball_count(QuadForm::identity(d), T, o.threads)
                        : chimney_count(QuadForm::identity(d), T, std::nullopt, o.threads);
      s.push_back({T, c.rel_error});
    }
    return fit_error_exponent(s, true);
  };
  auto f2 = sweep(2, 16, 2048, 300, false);
  auto f3 = sweep(3, 8, 128, 200, true);
  ok = f2.slope <= -0.40 && f3.slope <= -0.45;
  std::ostringstream os;
  os << "d=2 chimney slope " << f2.slope << " (theory " << theory_slope(2).value() << ", " << f2.n_points
     << " maxima); d=3 horoball slope " << f3.slope << " (theory " << theory_slope(3).value() << ", "
     << f3.n_points << " maxima)";
  return os.str();
}

QuadratureSpec d2_spec(const AcceptanceOptions& o, double res) {
  QuadratureSpec q;
  q.torus_resolution = res;
  q.threads = o.threads;
  return q;
}

std::string c5(const AcceptanceOptions& o, bool& ok) {
  auto ind = RadialProfile::indicator(1);
  auto a0 = horosphere_average(2, 0, ind, d2_spec(o, 200));
  auto a12 = horosphere_average(2, 12, ind, d2_spec(o, 200));
  bool ok0 = std::abs(a0.value - 2.0) <= a0.quad_error_estimate + 1e-12;
  bool ok12 = std::abs(a12.value - 6 / std::numbers::pi) <= 0.05;
  QuadratureSpec q3;
  q3.threads = o.threads;
  q3.strict = false;
  bool ok3 = true;
  std::ostringstream os;
  os << "F(0)=" << a0.value << " F(12)=" << a12.value << " (target " << a12.target << ")";
  for (double t : {0.5, 1.5, 3.0}) {
    auto a = horosphere_average(3, t, RadialProfile::bump(1), q3);
    ok3 = ok3 && std::isfinite(a.value) && a.converged;
    os << "; d=3 F(" << t << ")=" << a.value << " +- " << a.quad_error_estimate << (a.converged ? "" : " (not converged)");
  }
  ok = ok0 && ok12 && ok3;
  return os.str();
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> v;
  for (int i = 0; lo + i * step <= hi + 1e-9; ++i) v.push_back(lo + i * step);
  return v;
}

double bump_norm(const AcceptanceOptions& o) { return siegel_l2_norm(RadialProfile::bump(1), 100000, o.seed); }

std::string c6(const AcceptanceOptions& o, bool& ok) {
  auto h = RadialProfile::bump(1);
  auto q = d2_spec(o, 24);
  const double T2 = constants(2).T_d;
  std::vector<double> ts = grid(1.0, 14.0, 0.05);
  auto series = decay_series(2, h, ts, q);
  std::vector<HoroAverage> early;
  for (double t : grid(std::ceil(T2 * 20) / 20, 0.95, 0.05)) early.push_back(horosphere_average(2, t, h, q));
  std::vector<HoroAverage> all = early;
  all.insert(all.end(), series.samples.begin(), series.samples.end());
  const double fn = bump_norm(o);
  const double grad = lipschitz_along_flow(2, h, grid(0.4, 13.4, 0.5), q);
  auto b = check_thm12_bound(all, fn, grad, 2);
  const double limit = series.slope_thm12 + 0.03;
  ok = series.fit.slope <= limit && b.passed;
  std::ostringstream os;
  os << "slope " << series.fit.slope << " (<= " << limit << ", r2 " << series.fit.r2 << ", " << series.fit.n_points
     << " maxima); bound: " << b.checked - b.failed << "/" << b.checked << " t >= T_2 pass, worst ratio "
     << b.worst_ratio << " at t=" << b.worst_t << ", |f|=" << fn << ", grad=" << grad;
  return os.str();
}

std::string c7(const AcceptanceOptions& o, bool& ok) {
  auto q = d2_spec(o, 24);
  const double fn = bump_norm(o);
  auto reps = integrated_error_check(2, RadialProfile::bump(1), {4, 6, 8, 10}, fn, q, 0.02);
  ok = !reps.empty();
  std::ostringstream os;
  os << "|f|=" << fn;
  for (auto& r : reps) {
    ok = ok && r.passed;
    os << "; T=" << r.T << " |lhs| " << std::abs(r.lhs) << " <= " << r.rhs << " + " << r.budget;
  }
  return os.str();
}

std::string c8(const AcceptanceOptions& o, bool& ok) {
  ok = true;
  std::ostringstream os;
  SamplerConfig ex;
  ex.seed = o.seed;
  ex.threads = o.threads;
  for (double R : {5.0, 10.0, 20.0}) {
    auto r = mean_square_check(2, R, 10000, ex);
    ok = ok && r.passed;
    os << "d=2 R=" << R << " E1^2 " << r.mean_E1sq << " (bound " << r.bound_E1 << "); ";
  }
  SamplerConfig w = ex;
  w.kind = SamplerConfig::Kind::Walk;
  for (double R : {3.0, 5.0}) {
    auto r = mean_square_check(3, R, 2000, w);
    ok = ok && r.passed;
    os << "d=3 R=" << R << " E1^2 " << r.mean_E1sq << " (bound " << r.bound_E1 << "); ";
  }
  return os.str();
}

std::string c9(const AcceptanceOptions&, bool& ok) {
  LocatorParams p{1, 0.5, 0.1, 1, 1};
  const double T0 = p.t0();
  std::vector<std::pair<double, double>> g;
  for (double t = 0; t <= T0 + 20 + p.phi(T0 + 20) + 1; t += 1e-3)
    g.push_back({t, 0.5 * std::exp(-0.5 * t) * std::cos(std::exp(0.5 * t))});
  auto hits = good_t_locator(g, p);
  auto gaps = check_windows(hits, T0, 20, 100, p);
  LocatorParams neg = p;
  neg.kappa = 1e-6;
  auto neg_gaps = check_windows(good_t_locator(g, neg), T0, 20, 100, p);
  ok = gaps.ok() && !neg_gaps.ok();
  std::ostringstream os;
  os << "T0=" << T0 << "; windows with a hit " << gaps.windows - gaps.empty << "/" << gaps.windows
     << "; kappa=1e-6 control: " << neg_gaps.empty << " empty windows";
  return os.str();
}

std::string c10(const AcceptanceOptions&, bool& ok) {
  double worst_b = 0, worst_chi = 0, worst_scale = 0;
  bool scale_ok = true;
  for (int d = 2; d <= 5; ++d) {
    QuadForm q0 = QuadForm::identity(d);
    for (double t : grid(-10, 10, 0.1)) {
      worst_b = std::max(worst_b, std::abs(busemann_r(act(q0, geodesic_r(d, t))) + t));
      worst_b = std::max(worst_b, std::abs(busemann_rho(act(q0, geodesic_rho(d, t))) + t));
      double expect = std::exp(t * std::sqrt(double(d - 1) * d) / 2);
      worst_chi = std::max(worst_chi, std::abs(chi_d(geodesic_r(d, -t)) / expect - 1));
    }
    if (d <= 4)
      for (double t : {-3.0, 1.0, 4.0}) {
        auto s = torus_volume_scaling(d, t, 15);
        worst_scale = std::max(worst_scale, s.rel_diff);
        scale_ok = scale_ok && s.rel_diff <= s.quad_error + 1e-10;
      }
  }
  ok = worst_b <= 1e-12 && worst_chi <= 1e-12 && scale_ok;
  std::ostringstream os;
  os << "max |f+t| " << worst_b << "; max chi rel " << worst_chi << "; torus volume scaling rel " << worst_scale;
  return os.str();
}

struct Entry {
  const char* name;
  double limit;
  std::string (*fn)(const AcceptanceOptions&, bool&);
};

const Entry kEntries[] = {
    {"counting oracle", 60, c1},       {"moebius exactness", 300, c2},   {"siegel main term", 300, c3},
    {"counting error rate", 600, c4},  {"equidistribution targets", 600, c5}, {"horosphere decay rate", 900, c6},
    {"integrated bound", 900, c7},     {"mean square", 600, c8},          {"good-t locator", 60, c9},
    {"geometry identities", 60, c10},
};

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
  if (id < 1 || id > 10) throw std::invalid_argument("criterion id must be in 1..10");
  const Entry& e = kEntries[id - 1];
  CriterionResult r;
  r.id = id;
  r.name = e.name;
  r.limit_seconds = e.limit;
  auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    r.detail = e.fn(opt, ok);
  } catch (const std::exception& ex) {
    r.detail = std::string("exception: ") + ex.what();
    ok = false;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.passed = ok && r.seconds <= r.limit_seconds;
  if (ok && !r.passed) r.detail += "; over the time limit";
  return r;
}

std::vector<int> fast_suite() { return {1, 2, 9, 10}; }

std::vector<int> full_suite() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}; }

std::string format_line(const CriterionResult& r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(1);
  os << (r.passed ? "PASS" : "FAIL") << " " << r.id << " " << r.name << " [" << r.seconds << "s/" << r.limit_seconds
     << "s] ";
  os.unsetf(std::ios::fixed);
  os.precision(6);
  os << r.detail;
  return os.str();
}

}  // namespace horocount
