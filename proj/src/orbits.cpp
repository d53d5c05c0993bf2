#include "horocount/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace horocount {

double t_of_radius(int d, double R) {
  if (!(R > 0)) throw std::invalid_argument("radius must be positive");
  return 2.0 * std::sqrt(double(d) / (d - 1)) * std::log(R);
}

double radius_of_t(int d, double T) { return std::exp(T * std::sqrt(double(d - 1) / d) / 2.0); }

namespace {

using i128 = __int128;

i128 int_det(const std::vector<std::vector<std::int64_t>>& m) {
  const auto n = m.size();
  if (n == 1) return m[0][0];
  i128 det = 0;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<std::vector<std::int64_t>> minor;
    for (std::size_t r = 1; r < n; ++r) {
      std::vector<std::int64_t> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != c) row.push_back(m[r][k]);
      minor.push_back(row);
    }
    i128 sub = int_det(minor);
    det += (c % 2 == 0 ? 1 : -1) * i128(m[0][c]) * sub;
  }
  return det;
}

}  // namespace

std::int64_t stabilizer_order(const QuadForm& q, std::int64_t candidate_limit) {
  const int d = q.dim();
  if (d < 2 || d > 4) throw std::invalid_argument("stabilizer_order supports d in {2,3,4}");
  const Matrix& m = q.gram();
  const double top = m.diagonal().maxCoeff();
  // Candidate columns for each position i: vectors with Q(v) = M_ii.
  std::vector<std::vector<Vector>> cand(d);
  std::vector<std::vector<std::vector<std::int64_t>>> cand_int(d);
  std::int64_t total = 0;
  for_each_point(
      q, top * (1 + 1e-9),
      [&](std::span<const std::int64_t> v, double val) {
        for (int i = 0; i < d; ++i) {
          if (std::abs(val - m(i, i)) <= 1e-9 * m(i, i)) {
            Vector x(d);
            for (int j = 0; j < d; ++j) x(j) = double(v[j]);
            cand[i].push_back(x);
            cand_int[i].emplace_back(v.begin(), v.end());
            if (++total > candidate_limit) throw std::runtime_error("stabilizer candidate set too large");
          }
        }
      },
      10 * candidate_limit + 1000000);
  std::vector<int> pick(d, -1);
  std::int64_t found = 0;
  auto rec = [&](auto&& self, int i) -> void {
    if (i == d) {
      std::vector<std::vector<std::int64_t>> g(d, std::vector<std::int64_t>(d));
      for (int c = 0; c < d; ++c)
        for (int r = 0; r < d; ++r) g[r][c] = cand_int[c][pick[c]][r];
      if (int_det(g) == 1) ++found;
      return;
    }
    for (int k = 0; k < static_cast<int>(cand[i].size()); ++k) {
      const Vector mv = m * cand[i][k];
      bool ok = true;
      for (int j = 0; j < i && ok; ++j) {
        double ip = mv.dot(cand[j][pick[j]]);
        ok = std::abs(ip - m(i, j)) <= 1e-9 * std::sqrt(m(i, i) * m(j, j));
      }
      if (!ok) continue;
      pick[i] = k;
      self(self, i + 1);
    }
  };
  rec(rec, 0);
  const int alpha = alpha_of(d);
  if (found % alpha != 0) throw std::runtime_error("stabilizer count not divisible by the center order");
  return found / alpha;
}

namespace {

ChimneyCount count_at(const QuadForm& q, double T, int threads) {
  const int d = q.dim();
  ChimneyCount c;
  c.T = T;
  c.R = radius_of_t(d, T);
  if (c.R > 1e-150) {
    auto r = count_primitive_moebius(EllipsoidSpec(q, c.R), CountMode::Float, threads);
    c.n1 = *r.n1;
    c.boundary_ambiguous = r.boundary_ambiguous;
  }
  return c;
}

}  // namespace

ChimneyCount chimney_count(const QuadForm& q, double T, std::optional<std::int64_t> sigma, int threads) {
  const int d = q.dim();
  ChimneyCount c = count_at(q, T, threads);
  if (sigma) {
    if (*sigma < 1) throw std::invalid_argument("sigma must be >= 1");
    c.sigma_q = *sigma;
  } else if (d <= 4) {
    c.sigma_q = stabilizer_order(q);
  } else {
    c.sigma_q = 1;
    c.sigma_assumed = true;
    std::cerr << "warning: sigma(Q) not supplied for d=" << d << ", assuming 1\n";
  }
  const std::int64_t div = alpha_of(d) * c.sigma_q;
  if (c.n1 % div != 0)
    throw std::runtime_error("N_1 = " + std::to_string(c.n1) + " not divisible by alpha*sigma = " +
                             std::to_string(div) + " (wrong sigma or boundary ambiguity)");
  c.count = c.n1 / div;
  const Constants k = constants(d);
  c.predicted = k.omega_d / (k.alpha_d * k.zeta_d) * std::exp(T * std::sqrt(double(d - 1) * d) / 2);
  c.rel_error = c.predicted > 0 ? double(c.sigma_q) * double(c.count) / c.predicted - 1.0 : 0.0;
  return c;
}

ChimneyCount horoball_count(const QuadForm& q, double T, int threads) {
  const int d = q.dim();
  ChimneyCount c = count_at(q, T, threads);
  c.sigma_q = 1;
  c.count = c.n1 / 2;
  const Constants k = constants(d);
  c.predicted = k.omega_d / (2 * k.zeta_d) * std::exp(T * std::sqrt(double(d - 1) * d) / 2);
  c.rel_error = c.predicted > 0 ? double(c.count) / c.predicted - 1.0 : 0.0;
  return c;
}

DecayFit fit_error_exponent(std::vector<std::pair<double, double>> series, bool envelope) {
  std::sort(series.begin(), series.end());
  std::vector<std::pair<double, double>> pts;
  if (envelope) {
    for (std::size_t i = 1; i + 1 < series.size(); ++i) {
      double a = std::abs(series[i - 1].second), b = std::abs(series[i].second),
             c = std::abs(series[i + 1].second);
      if (b > a && b > c) pts.push_back(series[i]);
    }
  } else {
    pts = series;
  }
  std::erase_if(pts, [](const auto& p) { return !(std::abs(p.second) > 0) || !std::isfinite(p.second); });
  if (pts.size() < 4) throw std::invalid_argument("degenerate series: fewer than 4 usable points");
  const double n = double(pts.size());
  double sx = 0, sy = 0;
  for (auto& [x, y] : pts) {
    sx += x;
    sy += std::log(std::abs(y));
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto& [x, y] : pts) {
    double dx = x - mx, dy = std::log(std::abs(y)) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0)) throw std::invalid_argument("degenerate series: all abscissae equal");
  DecayFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = syy - f.slope * sxy;
  f.r2 = syy > 0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  f.n_points = static_cast<int>(pts.size());
  f.envelope = envelope;
  return f;
}

double SurdExponent::value() const {
  return double(num) / double(den) * std::sqrt(double(rad_num) / double(rad_den));
}

SurdExponent theory_slope(int d) {
  switch (d) {
    case 2: return {-285, 416, 1, 2};
    case 3: return {-243, 158, 1, 6};
    case 4: return {-43, 104, 3, 1};
    default:
      if (d < 2) throw std::invalid_argument("theory slope: d must be >= 2");
      return {-1, 1, d - 1, d};
  }
}

}  // namespace horocount
