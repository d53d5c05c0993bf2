#include "horocount/moebius.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace horocount {

MoebiusTable sieve(std::int64_t limit) {
  if (limit < 1) throw std::invalid_argument("sieve limit must be >= 1");
  MoebiusTable t;
  t.limit = limit;
  t.mu.assign(limit + 1, 0);
  std::vector<std::int64_t> primes;
  std::vector<bool> composite(limit + 1, false);
  t.mu[1] = 1;
  for (std::int64_t i = 2; i <= limit; ++i) {
    if (!composite[i]) {
      primes.push_back(i);
      t.mu[i] = -1;
    }
    for (auto p : primes) {
      if (i * p > limit) break;
      composite[i * p] = true;
      if (i % p == 0) {
        t.mu[i * p] = 0;
        break;
      }
      t.mu[i * p] = static_cast<std::int8_t>(-t.mu[i]);
    }
  }
  return t;
}

std::int64_t mertens(const MoebiusTable& table, std::int64_t n) {
  if (n > table.limit) throw std::out_of_range("mertens: n beyond sieve limit");
  std::int64_t s = 0;
  for (std::int64_t k = 1; k <= n; ++k) s += table.mu[k];
  return s;
}

std::vector<std::int64_t> shells_from_primitive(const std::vector<std::int64_t>& r1) {
  std::vector<std::int64_t> r0(r1.size(), 0);
  const auto n = static_cast<std::int64_t>(r1.size()) - 1;
  for (std::int64_t k = 1; k * k <= n; ++k)
    for (std::int64_t y = 1; y * k * k <= n; ++y) r0[y * k * k] += r1[y];
  return r0;
}

std::vector<std::int64_t> primitive_from_shells(const std::vector<std::int64_t>& r0) {
  std::vector<std::int64_t> r1(r0.size(), 0);
  const auto n = static_cast<std::int64_t>(r0.size()) - 1;
  if (n < 1) return r1;
  auto mu = sieve(std::max<std::int64_t>(1, static_cast<std::int64_t>(std::sqrt(double(n))) + 1));
  for (std::int64_t k = 1; k * k <= n; ++k) {
    if (mu(k) == 0) continue;
    for (std::int64_t y = 1; y * k * k <= n; ++y) r1[y * k * k] += mu(k) * r0[y];
  }
  return r1;
}

InversionReport verify_inversion(const EllipsoidSpec& spec) {
  if (!spec.form.is_integral()) throw std::invalid_argument("verify_inversion needs an integral Gram matrix");
  auto top = static_cast<std::int64_t>(std::floor(spec.bound() * (1 + 1e-12)));
  InversionReport rep;
  if (top < 1) return rep;
  ShellCounts s = shell_tables(spec.form, top);
  auto r0 = shells_from_primitive(s.r1);
  auto r1 = primitive_from_shells(s.r0);
  for (std::int64_t x = 1; x <= top; ++x) {
    ++rep.levels_checked;
    if (r0[x] != s.r0[x]) {
      rep.ok = false;
      rep.first_violation = ShellViolation{x, "r0 = sum r1(x/k^2)", s.r0[x], r0[x]};
      return rep;
    }
    if (r1[x] != s.r1[x]) {
      rep.ok = false;
      rep.first_violation = ShellViolation{x, "r1 = sum mu(k) r0(x/k^2)", s.r1[x], r1[x]};
      return rep;
    }
  }
  return rep;
}

namespace {

double ulp(double x) {
  x = std::abs(x);
  return std::nextafter(x, std::numeric_limits<double>::infinity()) - x;
}

EllipsoidSpec scaled(const EllipsoidSpec& spec, std::int64_t k) {
  if (spec.radius_sq)
    return EllipsoidSpec::exact(spec.form, spec.radius_sq->num, spec.radius_sq->den * k * k);
  return EllipsoidSpec(spec.form, spec.radius / double(k));
}

}  // namespace

RelationReport error_relation_check(const EllipsoidSpec& spec, std::int64_t tail_terms) {
  const int d = spec.form.dim();
  const double R = spec.radius;
  const double w = unit_ball_volume(d);
  const double z = zeta(d);
  const CountMode mode = spec.radius_sq ? CountMode::Exact : CountMode::Float;
  // The split point may be any k0 with N_0(R/k) = 1 beyond it; R itself
  // works only when the form has no vectors shorter than 1.
  const std::int64_t kmax =
      std::max(static_cast<std::int64_t>(std::floor(R * (1 + 1e-12))), moebius_cutoff(spec.form, R));
  const std::int64_t K = std::max(tail_terms, kmax + 1);
  const MoebiusTable mu = sieve(K);
  const double Rd = std::pow(R, d);

  // Tails over k > kmax: explicit terms to K, then an integral bracket.
  double tail_mu = 0.0, tail_one = 0.0;
  for (std::int64_t k = K; k > kmax; --k) {
    double p = std::pow(double(k), -d);
    tail_mu += mu(k) * p;
    tail_one += p;
  }
  const double hi = std::pow(double(K), 1.0 - d) / (d - 1);
  const double lo = std::pow(double(K + 1), 1.0 - d) / (d - 1);
  tail_one += 0.5 * (hi + lo);
  const double hw_one = 0.5 * (hi - lo);
  const double hw_mu = hi;

  // Counts exclude the origin on both sides of the identities.
  double sum_mu_e0 = 0.0, sum_e1 = 0.0, scale = w * Rd;
  for (std::int64_t k = 1; k <= kmax; ++k) {
    EllipsoidSpec s = scaled(spec, k);
    double main = w * std::pow(R / double(k), d);
    if (mu(k) != 0) {
      double e0 = double(*count_full(s, mode).n0 - 1) - main;
      sum_mu_e0 += mu(k) * e0;
    }
    double e1 = double(*count_primitive_direct(s, mode).n1) - main / z;
    sum_e1 += e1;
    scale = std::max(scale, std::abs(e1));
  }

  RelationReport rep{};
  double n1 = 0.0, n0 = 0.0;
  n1 = double(*count_primitive_direct(spec, mode).n1);
  n0 = double(*count_full(spec, mode).n0 - 1);
  rep.lhs_e1 = n1 - w * Rd / z;
  rep.rhs_e1 = sum_mu_e0 - w * Rd * tail_mu;
  rep.lhs_e0 = n0 - w * Rd;
  rep.rhs_e0 = sum_e1 - w / z * Rd * tail_one;
  const double round = d * 1e3 * ulp(std::max(scale, 1.0));
  rep.residual_e1 = std::abs(rep.lhs_e1 - rep.rhs_e1);
  rep.residual_e0 = std::abs(rep.lhs_e0 - rep.rhs_e0);
  rep.budget_e1 = w * Rd * hw_mu + round;
  rep.budget_e0 = w / z * Rd * hw_one + round;
  rep.passed = rep.residual_e1 <= rep.budget_e1 && rep.residual_e0 <= rep.budget_e0;
  return rep;
}

}  // namespace horocount
