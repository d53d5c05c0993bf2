#pragma once

// Template parts of detail::Walker. Included from latcount.hpp.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace horocount::detail {

// Integer interval [lo, hi] of k with a k^2 + 2 b k + c <= bound; empty if lo > hi.
inline void leaf_interval(double a, double b, double c, double bound, std::int64_t& lo, std::int64_t& hi) {
  auto q = [&](std::int64_t k) {
    double kk = static_cast<double>(k);
    return (a * kk + 2.0 * b) * kk + c;
  };
  double center = -b / a;
  double disc = b * b - a * (c - bound);
  if (disc < 0) {
    lo = static_cast<std::int64_t>(std::llround(center));
    hi = lo - 1;
  } else {
    double r = std::sqrt(disc) / a;
    lo = static_cast<std::int64_t>(std::ceil(center - r));
    hi = static_cast<std::int64_t>(std::floor(center + r));
  }
  while (q(hi + 1) <= bound) ++hi;
  while (hi >= lo && q(hi) > bound) --hi;
  while (q(lo - 1) <= bound) --lo;
  while (lo <= hi && q(lo) > bound) ++lo;
}

template <class Leaf>
void Walker::descend(int level, double remaining, std::int64_t* v, std::int64_t& nodes, Leaf& leaf) const {
  if (level == 0) {
    leaf(v);
    return;
  }
  const int d = d_;
  const double lii = l_[level * d + level];
  double s = 0.0;
  for (int j = level + 1; j < d; ++j) s += l_[j * d + level] * static_cast<double>(v[j]);
  const double center = -s / lii;
  const double half = std::sqrt(remaining > 0 ? remaining : 0.0) / lii;
  const auto lo = static_cast<std::int64_t>(std::ceil(center - half));
  const auto hi = static_cast<std::int64_t>(std::floor(center + half));
  for (std::int64_t k = lo; k <= hi; ++k) {
    if (++nodes > node_budget) throw std::runtime_error("enumeration budget exceeded");
    v[level] = k;
    double y = lii * (static_cast<double>(k) - center);
    descend(level - 1, remaining - y * y, v, nodes, leaf);
  }
}

template <class F>
void Walker::visit(double bound, F&& f) {
  const int d = d_;
  check_extent(bound);
  const double prune = bound * (1.0 + 1e-9) + 1e-12;
  std::int64_t nodes = 0;
  auto leaf = [&](std::int64_t* v) {
    double a, b, c;
    leaf_coeffs(v, a, b, c);
    std::int64_t lo, hi;
    leaf_interval(a, b, c, bound, lo, hi);
    for (std::int64_t k = lo; k <= hi; ++k) {
      if (++nodes > node_budget) throw std::runtime_error("enumeration budget exceeded");
      v[0] = k;
      double kk = static_cast<double>(k);
      double q = (a * kk + 2.0 * b) * kk + c;
      for (int i = 0; i < d; ++i) orig_[perm_[i]] = v[i];
      f(std::span<const std::int64_t>(orig_.data(), d), q);
    }
  };
  std::int64_t* v = v_.data();
  for (int i = 0; i < d; ++i) v[i] = 0;
  // Start at the outermost level with an empty suffix.
  const int top = d - 1;
  const double ltt = l_[top * d + top];
  const double half = std::sqrt(prune) / ltt;
  const auto lo = static_cast<std::int64_t>(std::ceil(-half));
  const auto hi = static_cast<std::int64_t>(std::floor(half));
  for (std::int64_t k = lo; k <= hi; ++k) {
    v[top] = k;
    double y = ltt * static_cast<double>(k);
    descend(top - 1, prune - y * y, v, nodes, leaf);
  }
}

template <class H>
double Walker::primitive_sum(double bound, H&& h) {
  // Same closed-boundary tolerance as float counting; h sees at most bound.
  const double lim = bound + 8.0 * d_ * (std::nextafter(bound, 2 * bound + 1) - bound);
  double sum = 0.0;
  visit(lim, [&](std::span<const std::int64_t> v, double q) {
    if (q <= lim && gcd_of(v) == 1) sum += h(std::min(q, bound));
  });
  return sum;
}

}  // namespace horocount::detail
