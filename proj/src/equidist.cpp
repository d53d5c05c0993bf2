#include "horocount/equidist.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "horocount/latcount.hpp"

namespace horocount {

RadialProfile RadialProfile::indicator(double s) {
  if (!(s > 0) || !std::isfinite(s)) throw std::invalid_argument("support must be positive");
  return {Kind::Indicator, s, 0.0};
}

RadialProfile RadialProfile::bump(double s, double p) {
  if (!(s > 0) || !std::isfinite(s)) throw std::invalid_argument("support must be positive");
  if (!(p >= 0 && p < s)) throw std::invalid_argument("bump plateau must lie in [0, s)");
  return {Kind::Bump, s, p};
}

double RadialProfile::operator()(double u) const {
  if (u > support_end) return 0.0;
  if (kind == Kind::Indicator || u <= plateau) return 1.0;
  double tau = (u - plateau) / (support_end - plateau);
  return 1.0 - tau * tau * (3.0 - 2.0 * tau);
}

double RadialProfile::integral(int d) const {
  const double w = unit_ball_volume(d);
  const double a = d / 2.0;
  const double s = support_end;
  if (kind == Kind::Indicator) return w * std::pow(s, a);
  // int_0^s h(u) u^{a-1} du by parts over the cubic taper.
  const double p = plateau, c = 1.0 / (s - p);
  const double a3 = a * (a + 1) * (a + 2), a4 = a3 * (a + 3);
  double j = 6 * c * c * (std::pow(s, a + 2) + std::pow(p, a + 2)) / a3 -
             12 * c * c * c * (std::pow(s, a + 3) - std::pow(p, a + 3)) / a4;
  return d * w / 2.0 * j;
}

namespace {

int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

int round_up(int n, int m) { return (n + m - 1) / m * m; }

void check_refinement(const QuadratureSpec& q) {
  if (q.refinement_factor < 3 || q.refinement_factor % 2 == 0)
    throw std::invalid_argument("refinement_factor must be odd and >= 3");
  if (q.torus_grid < 8 || q.base_grid[0] < 8 || q.base_grid[1] < 8)
    throw std::invalid_argument("quadrature grids must be >= 8");
}

// Odd midpoint grids put a node at x = 0, a discontinuity locus for the
// indicator at t = 0; the rule is shifted off it. Nested levels stay nested.
const double kTorusShift = (std::sqrt(5.0) - 2.0) / 8.0;

// Fills out[b * n^m + k] with the test function at base b, torus node k.
void fill_values(double t, const std::vector<Matrix>& bases, const RadialProfile& h, int n, int threads,
                 std::vector<double>& out) {
  const int m = static_cast<int>(bases.front().rows());
  const int d = m + 1;
  const auto [lambda, mu] = rates(d);
  const double el = std::exp(-lambda * t), em = std::exp(mu * t);
  std::int64_t per = 1;
  for (int i = 0; i < m; ++i) per *= n;
  const std::int64_t total = per * static_cast<std::int64_t>(bases.size());
  out.assign(total, 0.0);
  const double s = h.support_end;
  const int nt = resolve_threads(threads);
#pragma omp parallel num_threads(nt)
  {
    detail::Walker w(d);
    std::vector<double> g(d * d);
    std::vector<double> x(m);
#pragma omp for schedule(dynamic, 64)
    for (std::int64_t idx = 0; idx < total; ++idx) {
      const Matrix& H = bases[idx / per];
      std::int64_t k = idx % per;
      for (int i = 0; i < m; ++i) {
        x[i] = (double(k % n) + 0.5 + kTorusShift) / n - 0.5;
        k /= n;
      }
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) g[i * d + j] = el * H(i, j) + em * x[i] * x[j];
        g[i * d + m] = g[m * d + i] = em * x[i];
      }
      g[m * d + m] = em;
      w.set_form(g.data());
      out[idx] = w.primitive_sum(s, h);
    }
  }
}

// Torus average at base b over the level-l subgrid (stride r^l).
double torus_level(const std::vector<double>& v, std::int64_t b, int n, int m, int r, int level,
                   std::vector<double>& scratch) {
  int stride = 1;
  for (int i = 0; i < level; ++i) stride *= r;
  if (n % stride) return std::numeric_limits<double>::quiet_NaN();
  const int off = (stride - 1) / 2, nc = n / stride;
  std::int64_t per = 1, cnt = 1;
  for (int i = 0; i < m; ++i) {
    per *= n;
    cnt *= nc;
  }
  scratch.resize(cnt);
  for (std::int64_t c = 0; c < cnt; ++c) {
    std::int64_t rem = c, k = 0, mul = 1;
    for (int i = 0; i < m; ++i) {
      k += (off + stride * (rem % nc)) * mul;
      rem /= nc;
      mul *= n;
    }
    scratch[c] = v[b * per + k];
  }
  return pairwise_sum(scratch) / double(cnt);
}

int torus_grid_at(int d, double t, const QuadratureSpec& q) {
  const auto [lambda, mu] = rates(d);
  const int r2 = q.refinement_factor * q.refinement_factor;
  double want = q.torus_grid;
  if (q.torus_resolution > 0) want = std::max(want, std::ceil(q.torus_resolution * std::exp((lambda + mu) * t / 2)));
  if (want > 1e7) throw std::runtime_error("torus grid too large at this t");
  return round_up(static_cast<int>(want), r2);
}

// Discontinuous profiles converge like 1/n and not monotonically, hence the wider floor.
bool converged(double est, double prev, double target, const RadialProfile& h) {
  if (!std::isfinite(prev)) return true;
  const double floor = (h.kind == RadialProfile::Kind::Indicator ? 1e-2 : 1e-3) * (std::abs(target) + 1);
  return !(est > 10 * prev && est > floor);
}

HoroAverage finish(HoroAverage a, const RadialProfile& h, int d, const QuadratureSpec& q, double prev) {
  a.target = space_average(h, d);
  a.err = a.value - a.target;
  a.converged = converged(a.quad_error_estimate, prev, a.target, h);
  if (!a.converged && q.strict)
    throw std::runtime_error("quadrature did not converge: refinement disagreement " +
                             std::to_string(a.quad_error_estimate) + " vs previous " + std::to_string(prev));
  return a;
}

HoroAverage average_d2(double t, const RadialProfile& h, const QuadratureSpec& q) {
  const int r = q.refinement_factor;
  const int n = torus_grid_at(2, t, q);
  std::vector<Matrix> base{Matrix::Identity(1, 1)};
  std::vector<double> v, scratch;
  fill_values(t, base, h, n, q.threads, v);
  double f0 = torus_level(v, 0, n, 1, r, 0, scratch);
  double f1 = torus_level(v, 0, n, 1, r, 1, scratch);
  double f2 = torus_level(v, 0, n, 1, r, 2, scratch);
  HoroAverage a;
  a.t = t;
  a.value = f0;
  a.quad_error_estimate = std::abs(f0 - f1);
  a.torus_grid = n;
  return finish(a, h, 2, q, std::abs(f1 - f2));
}

double cutoff_height(double t, const QuadratureSpec& q) {
  double y = q.base_cutoff_height ? *q.base_cutoff_height : std::exp(q.alpha * t / std::numbers::sqrt2);
  return std::max(1.0, y);
}

HoroAverage average_d3(double t, const RadialProfile& h, const QuadratureSpec& q) {
  const int r = q.refinement_factor, r2 = r * r;
  const int n = torus_grid_at(3, t, q);
  const int nx = round_up(q.base_grid[0], r2), ny = round_up(q.base_grid[1], r2);
  const double Y = cutoff_height(t, q), U = std::log(Y);
  std::vector<Matrix> bases;
  std::vector<double> weight;
  bases.reserve(nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      double x = -0.5 + (i + 0.5) / nx;
      double xi = (j + 0.5) / ny;
      double umin = 0.5 * std::log1p(-x * x);
      double u = umin + xi * (U - umin);
      double y = std::exp(u);
      Matrix H(2, 2);
      H << y + x * x / y, x / y, x / y, 1 / y;
      bases.push_back(H);
      weight.push_back(std::exp(-u) * (U - umin));
    }
  }
  std::vector<double> v, scratch;
  fill_values(t, bases, h, n, q.threads, v);
  std::vector<std::array<double, 3>> tor(bases.size());
  for (std::size_t b = 0; b < bases.size(); ++b)
    for (int l = 0; l < 3; ++l) tor[b][l] = torus_level(v, b, n, 2, r, l, scratch);
  auto level = [&](int bl, int tl) {
    int stride = bl == 0 ? 1 : bl == 1 ? r : r2;
    int off = (stride - 1) / 2;
    std::vector<double> num, den;
    for (int j = off; j < ny; j += stride)
      for (int i = off; i < nx; i += stride) {
        std::size_t b = std::size_t(j) * nx + i;
        num.push_back(weight[b] * tor[b][tl]);
        den.push_back(weight[b]);
      }
    return pairwise_sum(num) / pairwise_sum(den);
  };
  double v00 = level(0, 0), v01 = level(0, 1), v10 = level(1, 0);
  double v02 = level(0, 2), v20 = level(2, 0);
  HoroAverage a;
  a.t = t;
  a.value = v00;
  a.quad_error_estimate = std::abs(v00 - v01) + std::abs(v00 - v10);
  a.torus_grid = n;
  a.base_grid = {nx, ny};
  a.cutoff_height = Y;
  return finish(a, h, 3, q, std::abs(v01 - v02) + std::abs(v10 - v20));
}

}  // namespace

double eval_test_function(const QuadForm& q, const RadialProfile& h) {
  detail::Walker w(q.dim());
  w.set_form(q.gram().data());
  return w.primitive_sum(h.support_end, h);
}

double space_average(const RadialProfile& h, int d) { return h.integral(d) / zeta(d); }

Matrix fiber_gram(double t, const Matrix& H, const Vector& x) {
  const int m = static_cast<int>(H.rows()), d = m + 1;
  if (x.size() != m) throw std::invalid_argument("fiber_gram: dimension mismatch");
  const auto [lambda, mu] = rates(d);
  const double em = std::exp(mu * t);
  Matrix g(d, d);
  g.topLeftCorner(m, m) = std::exp(-lambda * t) * H + em * x * x.transpose();
  g.topRightCorner(m, 1) = em * x;
  g.bottomLeftCorner(1, m) = em * x.transpose();
  g(m, m) = em;
  return g;
}

double fiber_integral(double t, const GroupElement& base_point, const RadialProfile& h, int grid, int threads) {
  if (grid < 8) throw std::invalid_argument("grid must be >= 8");
  const Matrix H = base_point.mat().transpose() * base_point.mat();
  std::vector<double> v;
  fill_values(t, {H}, h, grid, threads, v);
  return pairwise_sum(v) / double(v.size());
}

double fiber_integral_serial(double t, const GroupElement& base_point, const RadialProfile& h, int grid) {
  return fiber_integral(t, base_point, h, grid, 1);
}

HoroAverage horosphere_average(int d, double t, const RadialProfile& h, const QuadratureSpec& q) {
  check_refinement(q);
  if (d == 2) return average_d2(t, h, q);
  if (d == 3) return average_d3(t, h, q);
  throw std::invalid_argument("horosphere_average supports d in {2,3}");
}

DecaySeries decay_series(int d, const RadialProfile& h, const std::vector<double>& t_grid, const QuadratureSpec& q) {
  DecaySeries s;
  std::vector<std::pair<double, double>> pts;
  for (double t : t_grid) {
    s.samples.push_back(horosphere_average(d, t, h, q));
    pts.push_back({t, s.samples.back().err});
  }
  s.fit = fit_error_exponent(pts, true);
  const Constants c = constants(d);
  s.slope_thm12 = -c.exponent_thm12;
  s.slope_thm11 = -c.exponent_thm11;
  s.slope_edwards = -c.exponent_edwards;
  if (c.exponent_rh) s.slope_rh = -*c.exponent_rh;
  s.faster_than_thm12 = s.fit.slope <= s.slope_thm12;
  return s;
}

double LocatorParams::phi(double t) const { return 4 * ctilde / kappa * std::exp(-eps * t); }

double LocatorParams::t0() const { return std::log(2 * ctilde * (beta + eps) / kappa) / eps; }

double LocatorParams::threshold(double t) const { return kappa * std::exp(-(alpha - beta) * t + eps * t); }

std::vector<double> good_t_locator(const std::vector<std::pair<double, double>>& g, const LocatorParams& p) {
  if (!(p.beta > 0 && p.beta < p.alpha)) throw std::invalid_argument("need 0 < beta < alpha");
  if (!(p.eps > 0 && p.kappa > 0 && p.ctilde > 0)) throw std::invalid_argument("eps, kappa, ctilde must be positive");
  if (g.size() < 2) throw std::invalid_argument("need at least two samples");
  const double S = g.back().first;
  double step = 0;
  for (std::size_t i = 1; i < g.size(); ++i) {
    double dt = g[i].first - g[i - 1].first;
    if (!(dt > 0)) throw std::invalid_argument("samples must be strictly increasing in t");
    step = std::max(step, dt);
  }
  if (step > p.phi(S) / 4) throw std::invalid_argument("sampling step exceeds phi(S)/4");
  std::vector<double> hits;
  for (auto [t, v] : g)
    if (std::abs(v) <= p.threshold(t)) hits.push_back(t);
  return hits;
}

GapReport check_windows(const std::vector<double>& hits, double start, double span, int n_windows,
                        const LocatorParams& wp) {
  GapReport r;
  for (int i = 0; i < n_windows; ++i) {
    double T = start + (n_windows > 1 ? span * i / (n_windows - 1) : 0.0);
    auto it = std::lower_bound(hits.begin(), hits.end(), T);
    ++r.windows;
    if (it == hits.end() || *it > T + wp.phi(T)) {
      if (r.empty == 0) r.first_empty = T;
      ++r.empty;
    }
  }
  return r;
}

BoundReport check_thm12_bound(const std::vector<HoroAverage>& series, double f_norm, double grad_bound, int d) {
  if (!(f_norm >= 0) || !(grad_bound >= 0) || !std::isfinite(f_norm) || !std::isfinite(grad_bound))
    throw std::invalid_argument("missing norm estimates");
  const Constants c = constants(d);
  BoundReport r;
  for (const auto& s : series) {
    if (s.t < c.T_d) continue;
    double bound = (c.C_d * f_norm + 4 * grad_bound) * std::exp(-c.exponent_thm12 * s.t);
    double lhs = std::abs(s.err) - s.quad_error_estimate;
    double ratio = lhs / bound;
    ++r.checked;
    if (ratio > r.worst_ratio || r.checked == 1) {
      r.worst_ratio = ratio;
      r.worst_t = s.t;
    }
    if (lhs > bound) ++r.failed;
  }
  r.passed = r.checked > 0 && r.failed == 0;
  return r;
}

double lipschitz_along_flow(int d, const RadialProfile& h, const std::vector<double>& ts, const QuadratureSpec& q,
                            double dt) {
  double best = 0;
  for (double t : ts) {
    QuadratureSpec fixed = q;
    fixed.torus_grid = torus_grid_at(d, t + dt, q);
    fixed.torus_resolution = 0;
    double a = horosphere_average(d, t, h, fixed).value;
    double b = horosphere_average(d, t + dt, h, fixed).value;
    best = std::max(best, std::abs(b - a) / dt);
  }
  return 10 * best;
}

std::vector<IntegratedReport> integrated_error_check(int d, const RadialProfile& h, const std::vector<double>& Ts,
                                                     double f_norm, const QuadratureSpec& q, double dt) {
  if (Ts.empty()) return {};
  if (!(dt > 0)) throw std::invalid_argument("dt must be positive");
  const double rate = std::sqrt(double(d - 1) * d) / 2;
  auto integrand = [&](const HoroAverage& a) { return std::exp(rate * a.t) * a.err; };
  double t_low = -20;
  for (;; t_low -= 5) {
    if (t_low < -400) throw std::runtime_error("integrand does not decay as t -> -infinity");
    if (std::abs(integrand(horosphere_average(d, t_low, h, q))) < 1e-6) break;
  }
  const double top = *std::max_element(Ts.begin(), Ts.end());
  const auto steps = static_cast<std::int64_t>(std::ceil((top - t_low) / dt));
  std::vector<double> ts, f, qe;
  for (std::int64_t i = 0; i <= steps; ++i) {
    double t = t_low + dt * double(i);
    HoroAverage a = horosphere_average(d, t, h, q);
    ts.push_back(t);
    f.push_back(integrand(a));
    qe.push_back(std::exp(rate * t) * a.quad_error_estimate);
  }
  const double tail = std::abs(f.front()) / rate;
  std::vector<IntegratedReport> out;
  for (double T : Ts) {
    // Trapezoid on [t_low, T], with a partial last panel.
    double fine = 0, coarse = 0, qsum = 0;
    std::size_t last = 0;
    while (last + 1 < ts.size() && ts[last + 1] <= T + 1e-12) ++last;
    for (std::size_t i = 0; i < last; ++i) {
      fine += 0.5 * dt * (f[i] + f[i + 1]);
      qsum += 0.5 * dt * (qe[i] + qe[i + 1]);
    }
    for (std::size_t i = 0; i + 2 <= last; i += 2) coarse += dt * (f[i] + f[i + 2]);
    if (last % 2 == 1) coarse += 0.5 * dt * (f[last - 1] + f[last]);
    IntegratedReport r;
    r.T = T;
    r.lhs = fine;
    r.rhs = constants(d).C_d * f_norm * std::exp(rate * T / 2);
    r.budget = std::abs(fine - coarse) + qsum + tail;
    r.passed = std::abs(r.lhs) <= r.rhs + r.budget;
    out.push_back(r);
  }
  return out;
}

TruncationReport truncated_average(double t, double alpha, const RadialProfile& h, const QuadratureSpec& q) {
  const int d = 3;
  const double min_alpha = 0.5 * std::sqrt(double(d) / (d - 2));
  if (!(alpha >= min_alpha)) throw std::invalid_argument("alpha below (1/2) sqrt(d/(d-2))");
  const double theta = std::sqrt(double(d - 2) * (d - 1)) / 2;
  TruncationReport r;
  QuadratureSpec qa = q;
  qa.base_cutoff_height = std::exp(alpha * t / std::numbers::sqrt2);
  r.truncated = horosphere_average(d, t, h, qa);
  if (alpha >= q.reference_alpha) {
    r.reference = r.truncated.value;
  } else {
    QuadratureSpec qr = q;
    qr.base_cutoff_height = std::exp(q.reference_alpha * t / std::numbers::sqrt2);
    r.reference = horosphere_average(d, t, h, qr).value;
  }
  r.difference = std::abs(r.truncated.value - r.reference);
  r.theta_alpha = theta * alpha;
  r.scaled = r.difference * std::exp(r.theta_alpha * t);
  return r;
}

double shortest_primitive_value(const QuadForm& q) {
  const int d = q.dim();
  detail::Walker w(d);
  w.set_form(q.gram().data());
  double bound = q.gram().diagonal().minCoeff() * (1 + 1e-12);
  double best = std::numeric_limits<double>::infinity();
  w.visit(bound, [&](std::span<const std::int64_t> v, double val) {
    if (val < best && gcd_of(v) == 1) best = val;
  });
  return best;
}

CuspReport cusp_orbit_check(const GroupElement& base_point, double t, double a, int grid) {
  if (base_point.dim() != 2) throw std::invalid_argument("cusp_orbit_check supports d = 3 only");
  if (grid < 1) throw std::invalid_argument("grid must be positive");
  const Matrix H = base_point.mat().transpose() * base_point.mat();
  CuspReport r;
  r.threshold = std::exp(a * std::sqrt(2.0 / 3.0));
  Vector x(2);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      x << (i + 0.5) / grid - 0.5, (j + 0.5) / grid - 0.5;
      r.max_shortest = std::max(r.max_shortest, shortest_primitive_value(QuadForm(fiber_gram(t, H, x))));
    }
  r.inside = r.max_shortest <= r.threshold * (1 + 1e-12);
  return r;
}

ScalingReport torus_volume_scaling(int d, double t, int grid) {
  if (d < 2) throw std::invalid_argument("d must be >= 2");
  const int m = d - 1;
  const Matrix H = Matrix::Identity(m, m);
  // Volume density from the metric tr(M^{-1} dM M^{-1} dM) in the x coordinates.
  auto volume = [&](double tt, int n) {
    const double em = std::exp(rates(d).mu * tt);
    std::int64_t per = 1;
    for (int i = 0; i < m; ++i) per *= n;
    std::vector<double> vals(per);
    Vector x(m);
    for (std::int64_t k = 0; k < per; ++k) {
      std::int64_t rem = k;
      double weight = 1;
      for (int i = 0; i < m; ++i) {
        x(i) = (double(rem % n) + 0.5) / n - 0.5;
        rem /= n;
        weight *= std::cos(std::numbers::pi * x(i)) * std::cos(std::numbers::pi * x(i));
      }
      Matrix M = fiber_gram(tt, H, x);
      Matrix Mi = M.inverse();
      std::vector<Matrix> dM(m);
      for (int i = 0; i < m; ++i) {
        Matrix e = Matrix::Zero(d, d);
        for (int j = 0; j < m; ++j) {
          e(i, j) += x(j);
          e(j, i) += x(j);
        }
        e(i, m) = e(m, i) = 1;
        dM[i] = em * Mi * e;
      }
      Matrix G(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) G(i, j) = (dM[i] * dM[j]).trace();
      vals[k] = weight * std::sqrt(G.determinant());
    }
    return pairwise_sum(vals) / double(per);
  };
  ScalingReport r;
  r.ratio = volume(t, grid) / volume(0, grid);
  int coarse = std::max(1, grid / 3);
  double rc = volume(t, coarse) / volume(0, coarse);
  r.expected = std::exp(t * std::sqrt(double(d - 1) * d) / 2);
  r.rel_diff = std::abs(r.ratio / r.expected - 1);
  r.quad_error = std::abs(r.ratio - rc) / r.expected;
  return r;
}

}  // namespace horocount
