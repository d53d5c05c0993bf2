#include "horocount/latcount.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "horocount/moebius.hpp"

namespace horocount {

namespace {

double ulp(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()) - x; }

double float_tolerance(double bound, int d) { return 8.0 * ulp(bound) * d; }

int resolve_threads(int threads) { return threads > 0 ? threads : omp_get_max_threads(); }

void check_volume(const EllipsoidSpec& spec) {
  int d = spec.form.dim();
  double est = unit_ball_volume(d) * std::pow(std::max(spec.radius, 1.0) + 1.0, d);
  if (est > 4e18)
    throw std::overflow_error("count would overflow 64 bits (~" + std::to_string(est) +
                              " points); reduce the radius");
}

std::vector<double> row_major(const Matrix& m) {
  const int d = static_cast<int>(m.rows());
  std::vector<double> out(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out[i * d + j] = m(i, j);
  return out;
}

Rational exact_bound(const EllipsoidSpec& spec) {
  if (!spec.form.is_integral())
    throw std::invalid_argument("exact mode requires an integral Gram matrix of determinant 1");
  if (spec.radius_sq) return *spec.radius_sq;
  double r2 = spec.radius * spec.radius;
  double n = std::round(r2);
  if (std::abs(r2 - n) > 1e-9 * std::max(1.0, r2))
    throw std::invalid_argument("exact mode requires a rational R^2 (give R^2 = num/den)");
  return {static_cast<std::int64_t>(n), 1};
}

detail::Walker make_walker(const QuadForm& form, bool integral) {
  const int d = form.dim();
  detail::Walker w(d);
  if (integral) {
    std::vector<std::int64_t> gi(d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) gi[i * d + j] = std::llround(form.gram()(i, j));
    w.set_integer_form(gi.data());
  } else {
    w.set_form(row_major(form.gram()).data());
  }
  return w;
}

CountResult count_full_impl(const EllipsoidSpec& spec, CountMode mode, int threads) {
  check_volume(spec);
  CountResult r;
  r.mode = mode;
  if (mode == CountMode::Exact) {
    Rational b = exact_bound(spec);
    auto w = make_walker(spec.form, true);
    auto t = w.count_exact(b, threads);
    r.n0 = t.count;
  } else {
    auto w = make_walker(spec.form, false);
    auto t = w.count_float(spec.bound(), threads);
    r.n0 = t.count;
    r.boundary_ambiguous = t.ambiguous;
  }
  return r;
}

}  // namespace

EllipsoidSpec::EllipsoidSpec(QuadForm f, double r) : form(std::move(f)), radius(r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("radius must be positive and finite");
}

EllipsoidSpec EllipsoidSpec::exact(QuadForm f, std::int64_t num, std::int64_t den) {
  if (num <= 0 || den <= 0) throw std::invalid_argument("R^2 must be a positive rational");
  EllipsoidSpec s(std::move(f), std::sqrt(double(num) / double(den)));
  s.radius_sq = Rational{num, den};
  return s;
}

double EllipsoidSpec::bound() const {
  if (radius_sq) return double(radius_sq->num) / double(radius_sq->den);
  return radius * radius;
}

std::int64_t gcd_of(std::span<const std::int64_t> v) {
  std::int64_t g = 0;
  for (auto x : v) g = std::gcd(g, x < 0 ? -x : x);
  return g;
}

namespace detail {

Walker::Walker(int d) : d_(d), perm_(d), g_(d * d), gi_(d * d), l_(d * d), v_(d), orig_(d) {
  if (d < 2) throw std::invalid_argument("dimension must be >= 2");
}

void Walker::set_form(const double* gram) {
  const int d = d_;
  // Inverse diagonal via the Cholesky factor of the original order.
  std::vector<double> l(d * d, 0.0), inv(d * d, 0.0);
  for (int j = 0; j < d; ++j) {
    double s = gram[j * d + j];
    for (int k = 0; k < j; ++k) s -= l[j * d + k] * l[j * d + k];
    if (!(s > 0)) throw std::invalid_argument("form is not positive definite");
    l[j * d + j] = std::sqrt(s);
    for (int i = j + 1; i < d; ++i) {
      double v = gram[i * d + j];
      for (int k = 0; k < j; ++k) v -= l[i * d + k] * l[j * d + k];
      l[i * d + j] = v / l[j * d + j];
    }
  }
  for (int c = 0; c < d; ++c) {
    for (int i = c; i < d; ++i) {
      double v = i == c ? 1.0 : 0.0;
      for (int k = c; k < i; ++k) v -= l[i * d + k] * inv[k * d + c];
      inv[i * d + c] = v / l[i * d + i];
    }
  }
  std::vector<double> invdiag(d, 0.0);
  for (int j = 0; j < d; ++j)
    for (int k = j; k < d; ++k) invdiag[j] += inv[k * d + j] * inv[k * d + j];
  // Widest direction is counted in closed form at level 0.
  std::iota(perm_.begin(), perm_.end(), 0);
  std::stable_sort(perm_.begin(), perm_.end(), [&](int a, int b) { return invdiag[a] > invdiag[b]; });
  max_extent_ = std::sqrt(invdiag[perm_[0]]);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g_[i * d + j] = gram[perm_[i] * d + perm_[j]];
  std::fill(l_.begin(), l_.end(), 0.0);
  for (int j = 0; j < d; ++j) {
    double s = g_[j * d + j];
    for (int k = 0; k < j; ++k) s -= l_[j * d + k] * l_[j * d + k];
    if (!(s > 0)) throw std::invalid_argument("form is not positive definite");
    l_[j * d + j] = std::sqrt(s);
    for (int i = j + 1; i < d; ++i) {
      double v = g_[i * d + j];
      for (int k = 0; k < j; ++k) v -= l_[i * d + k] * l_[j * d + k];
      l_[i * d + j] = v / l_[j * d + j];
    }
  }
  integral_ = false;
}

void Walker::set_integer_form(const std::int64_t* gram) {
  const int d = d_;
  std::vector<double> g(d * d);
  for (int i = 0; i < d * d; ++i) g[i] = static_cast<double>(gram[i]);
  set_form(g.data());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) gi_[i * d + j] = gram[perm_[i] * d + perm_[j]];
  integral_ = true;
}

void Walker::check_extent(double bound) const {
  if (std::sqrt(bound) * max_extent_ > 1e9)
    throw std::overflow_error("coordinates exceed the enumeration range; reduce the radius");
}

void Walker::leaf_coeffs(const std::int64_t* v, double& a, double& b, double& c) const {
  const int d = d_;
  a = g_[0];
  b = 0.0;
  c = 0.0;
  for (int j = 1; j < d; ++j) {
    double vj = static_cast<double>(v[j]);
    b += g_[j] * vj;
    double row = 0.0;
    for (int k = 1; k < d; ++k) row += g_[j * d + k] * static_cast<double>(v[k]);
    c += vj * row;
  }
}

template <class MakeLeaf>
Walker::Tally Walker::run_count(double prune, int threads, MakeLeaf&& make_leaf) const {
  const int d = d_;
  const int top = d - 1;
  const double ltt = l_[top * d + top];
  const double half = std::sqrt(prune) / ltt;
  const auto lo = static_cast<std::int64_t>(std::ceil(-half));
  const auto hi = static_cast<std::int64_t>(std::floor(half));
  std::int64_t count = 0, ambiguous = 0;
  const int nt = resolve_threads(threads);
#pragma omp parallel num_threads(nt) reduction(+ : count, ambiguous)
  {
    std::vector<std::int64_t> v(d, 0);
    Tally local;
    auto leaf = make_leaf(local);
    std::int64_t nodes = 0;
#pragma omp for schedule(dynamic, 8)
    for (std::int64_t k = lo; k <= hi; ++k) {
      v[top] = k;
      double y = ltt * static_cast<double>(k);
      descend(top - 1, prune - y * y, v.data(), nodes, leaf);
    }
    count += local.count;
    ambiguous += local.ambiguous;
  }
  return {count, ambiguous};
}

Walker::Tally Walker::count_float(double bound, int threads) const {
  check_extent(bound);
  const double tol = float_tolerance(bound, d_);
  const double upper = bound + tol, lower = bound - tol;
  const double prune = upper * (1.0 + 1e-9) + 1e-12;
  return run_count(prune, threads, [this, upper, lower](Tally& t) {
    return [this, &t, upper, lower](std::int64_t* v) {
      double a, b, c;
      leaf_coeffs(v, a, b, c);
      std::int64_t lo, hi;
      leaf_interval(a, b, c, upper, lo, hi);
      if (lo > hi) return;
      t.count += hi - lo + 1;
      auto q = [&](std::int64_t k) {
        double kk = static_cast<double>(k);
        return (a * kk + 2.0 * b) * kk + c;
      };
      std::int64_t k = hi;
      while (k >= lo && q(k) >= lower) {
        ++t.ambiguous;
        --k;
      }
      for (std::int64_t j = lo; j < k && q(j) >= lower; ++j) ++t.ambiguous;
    };
  });
}

Walker::Tally Walker::count_exact(Rational bound, int threads) const {
  if (!integral_) throw std::logic_error("exact count needs an integer form");
  const double fb = double(bound.num) / double(bound.den);
  check_extent(fb);
  const double prune = fb * (1.0 + 1e-9) + 1e-12;
  return run_count(prune, threads, [this, bound, fb](Tally& t) {
    return [this, &t, bound, fb](std::int64_t* v) {
      const int d = d_;
      using i128 = __int128;
      i128 a = gi_[0], b = 0, c = 0;
      for (int j = 1; j < d; ++j) {
        b += i128(gi_[j]) * v[j];
        i128 row = 0;
        for (int k = 1; k < d; ++k) row += i128(gi_[j * d + k]) * v[k];
        c += row * v[j];
      }
      auto inside = [&](std::int64_t k) { return (a * k * k + 2 * b * k + c) * bound.den <= bound.num; };
      std::int64_t lo, hi;
      leaf_interval(double(a), double(b), double(c), fb, lo, hi);
      while (inside(hi + 1)) ++hi;
      while (hi >= lo && !inside(hi)) --hi;
      while (inside(lo - 1)) --lo;
      while (lo <= hi && !inside(lo)) ++lo;
      if (lo <= hi) t.count += hi - lo + 1;
    };
  });
}

}  // namespace detail

CountResult count_full(const EllipsoidSpec& spec, CountMode mode, int threads) {
  return count_full_impl(spec, mode, threads);
}

CountResult count_full_serial(const EllipsoidSpec& spec, CountMode mode) {
  return count_full_impl(spec, mode, 1);
}

void for_each_point(const QuadForm& form, double bound, const PointVisitor& visit, std::int64_t node_budget) {
  auto w = make_walker(form, false);
  w.node_budget = node_budget;
  w.visit(bound, [&](std::span<const std::int64_t> v, double q) { visit(v, q); });
}

CountResult count_primitive_direct(const EllipsoidSpec& spec, CountMode mode) {
  check_volume(spec);
  CountResult r;
  r.mode = mode;
  std::int64_t n1 = 0, amb = 0;
  const int d = spec.form.dim();
  if (mode == CountMode::Exact) {
    Rational b = exact_bound(spec);
    auto w = make_walker(spec.form, true);
    double fb = double(b.num) / double(b.den);
    w.visit(fb * (1 + 1e-9) + 1e-9, [&](std::span<const std::int64_t> v, double q) {
      auto qi = static_cast<__int128>(std::llround(q));
      if (qi * b.den <= b.num && gcd_of(v) == 1) ++n1;
    });
  } else {
    const double bound = spec.bound();
    const double tol = float_tolerance(bound, d);
    auto w = make_walker(spec.form, false);
    w.visit(bound + tol, [&](std::span<const std::int64_t> v, double q) {
      if (q <= bound + tol && gcd_of(v) == 1) {
        ++n1;
        if (q >= bound - tol) ++amb;
      }
    });
  }
  r.n1 = n1;
  r.boundary_ambiguous = amb;
  return r;
}

std::int64_t moebius_cutoff(const QuadForm& form, double radius) {
  // Every nonzero v has Q(v) >= lambda_min, so N_0(R/k) = 1 beyond R/sqrt(lambda_min).
  double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(form.gram(), Eigen::EigenvaluesOnly).eigenvalues()(0);
  return static_cast<std::int64_t>(std::floor(radius / std::sqrt(lmin) * (1 + 1e-9))) + 1;
}

CountResult count_primitive_moebius(const EllipsoidSpec& spec, CountMode mode, int threads) {
  check_volume(spec);
  const std::int64_t kmax = moebius_cutoff(spec.form, spec.radius);
  MoebiusTable mu = sieve(kmax);
  CountResult r;
  r.mode = mode;
  std::int64_t n1 = 0, amb = 0;
  if (mode == CountMode::Exact) {
    Rational b = exact_bound(spec);
    auto w = make_walker(spec.form, true);
    for (std::int64_t k = 1; k <= kmax; ++k) {
      if (k > 1 && mu(k) == 0) continue;
      auto t = w.count_exact(Rational{b.num, b.den * k * k}, threads);
      if (k == 1) r.n0 = t.count;
      if (t.count == 1) break;
      n1 += mu(k) * (t.count - 1);
    }
  } else {
    const double bound = spec.bound();
    auto w = make_walker(spec.form, false);
    for (std::int64_t k = 1; k <= kmax; ++k) {
      if (k > 1 && mu(k) == 0) continue;
      auto t = w.count_float(bound / double(k * k), threads);
      if (k == 1) r.n0 = t.count;
      amb += t.ambiguous;
      if (t.count == 1) break;
      n1 += mu(k) * (t.count - 1);
    }
  }
  r.n1 = n1;
  r.boundary_ambiguous = amb;
  return r;
}

CountResult error_terms(const EllipsoidSpec& spec, CountMode mode, int threads) {
  CountResult r = count_primitive_moebius(spec, mode, threads);
  const int d = spec.form.dim();
  double main = unit_ball_volume(d) * std::pow(spec.radius, d);
  r.e0 = double(*r.n0) - main;
  r.e1 = double(*r.n1) - main / zeta(d);
  return r;
}

ShellCounts shell_tables(const QuadForm& form, std::int64_t max_level) {
  if (!form.is_integral()) throw std::invalid_argument("shell tables need an integral Gram matrix");
  if (max_level < 0) throw std::invalid_argument("max level must be >= 0");
  ShellCounts s;
  s.r0.assign(max_level + 1, 0);
  s.r1.assign(max_level + 1, 0);
  auto w = make_walker(form, true);
  w.visit(double(max_level) + 0.5, [&](std::span<const std::int64_t> v, double q) {
    auto x = std::llround(q);
    if (x > max_level) return;
    ++s.r0[x];
    if (gcd_of(v) == 1) ++s.r1[x];
  });
  return s;
}

ShellCounts shell_counts(const EllipsoidSpec& spec, const std::vector<double>& xs, CountMode mode) {
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("shell levels must be strictly increasing");
  ShellCounts out;
  out.r0.assign(xs.size(), 0);
  out.r1.assign(xs.size(), 0);
  if (xs.empty()) return out;
  if (xs.front() < 0) throw std::invalid_argument("shell levels must be >= 0");
  const int d = spec.form.dim();
  if (mode == CountMode::Exact) {
    auto top = static_cast<std::int64_t>(std::floor(xs.back()));
    ShellCounts t = shell_tables(spec.form, top);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double n = std::round(xs[i]);
      if (std::abs(xs[i] - n) <= 1e-12 * std::max(1.0, n)) {
        out.r0[i] = t.r0[static_cast<std::size_t>(n)];
        out.r1[i] = t.r1[static_cast<std::size_t>(n)];
      }
    }
    return out;
  }
  const double top = xs.back() + float_tolerance(xs.back(), d);
  auto w = make_walker(spec.form, false);
  w.visit(top, [&](std::span<const std::int64_t> v, double q) {
    auto it = std::lower_bound(xs.begin(), xs.end(), q);
    for (auto c : {it, it == xs.begin() ? it : it - 1}) {
      if (c == xs.end()) continue;
      if (std::abs(q - *c) <= float_tolerance(*c, d)) {
        auto i = static_cast<std::size_t>(c - xs.begin());
        ++out.r0[i];
        if (gcd_of(v) == 1) ++out.r1[i];
        break;
      }
    }
  });
  return out;
}

double reference_exponent(int d) {
  if (d < 2) throw std::invalid_argument("reference exponent: d must be >= 2");
  switch (d) {
    case 2: return 131.0 / 208.0;
    case 3: return 231.0 / 158.0;
    case 4: return 61.0 / 26.0;
    default: return d - 2.0;
  }
}

}  // namespace horocount
