#include "horocount/randlat.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

#include "horocount/latcount.hpp"

namespace horocount {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64(s);
  s = a ^ (index * 0xd1b54a32d192ed03ULL);
  std::seed_seq seq{splitmix64(s), splitmix64(s), splitmix64(s), splitmix64(s)};
  return std::mt19937_64(seq);
}

std::complex<double> sample_modular_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double y0 = std::sqrt(3.0) / 2;
  for (;;) {
    double x = u(rng) - 0.5;
    double y = y0 / (1.0 - u(rng));  // density y0 / y^2 on [y0, inf)
    if (x * x + y * y >= 1.0) return {x, y};
  }
}

std::vector<LatticeSample> sample_exact_d2(std::mt19937_64& rng, int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  std::vector<LatticeSample> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    auto z = sample_modular_point(rng);
    double s = 1.0 / std::sqrt(z.imag());
    Matrix g(2, 2);
    g << s, s * z.real(), 0, s * z.imag();
    out.push_back({GroupElement::normalized(g), "exact_d2", 1.0});
  }
  return out;
}

Matrix lll_reduce(const Matrix& g) {
  const int d = static_cast<int>(g.cols());
  Matrix b = g;
  const double delta = 0.99;
  auto gso = [&](Matrix& bs, Matrix& mu) {
    bs = b;
    mu = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < i; ++j) {
        mu(i, j) = b.col(i).dot(bs.col(j)) / bs.col(j).squaredNorm();
        bs.col(i) -= mu(i, j) * bs.col(j);
      }
    }
  };
  Matrix bs, mu;
  gso(bs, mu);
  int k = 1, guard = 0;
  while (k < d) {
    if (++guard > 100000) throw std::runtime_error("LLL did not terminate");
    for (int j = k - 1; j >= 0; --j) {
      double r = std::round(mu(k, j));
      if (r != 0) {
        b.col(k) -= r * b.col(j);
        gso(bs, mu);
      }
    }
    if (bs.col(k).squaredNorm() >= (delta - mu(k, k - 1) * mu(k, k - 1)) * bs.col(k - 1).squaredNorm()) {
      ++k;
    } else {
      b.col(k).swap(b.col(k - 1));
      gso(bs, mu);
      k = std::max(k - 1, 1);
    }
  }
  if (b.determinant() < 0) b.col(0) *= -1;
  return b;
}

std::vector<LatticeSample> sample_walk(std::uint64_t seed, const WalkConfig& cfg, int n, int threads) {
  if (cfg.d < 2) throw std::invalid_argument("d must be >= 2");
  if (!(cfg.step_sigma > 0 && cfg.step_sigma <= 2)) throw std::invalid_argument("step_sigma must lie in (0, 2]");
  if (cfg.burn_in < 100) throw std::invalid_argument("burn_in must be >= 100");
  if (cfg.thin < 1 || cfg.chains < 1 || n < 1 || cfg.reduce_every < 1)
    throw std::invalid_argument("thin, chains, reduce_every and n must be >= 1");
  const int d = cfg.d;
  std::vector<std::vector<LatticeSample>> per(cfg.chains);
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for num_threads(nt) schedule(dynamic, 1)
  for (int c = 0; c < cfg.chains; ++c) {
    int want = n / cfg.chains + (c < n % cfg.chains ? 1 : 0);
    auto rng = stream(seed, std::uint64_t(c));
    std::normal_distribution<double> gauss(0.0, cfg.step_sigma);
    Matrix g = Matrix::Identity(d, d);
    std::int64_t step = 0;
    auto advance = [&]() {
      Matrix xi(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) xi(i, j) = gauss(rng);
      xi.diagonal().array() -= xi.trace() / d;
      g = Matrix(xi.exp()) * g;
      double det = g.determinant();
      if (!(det > 0) || !std::isfinite(det)) throw std::runtime_error("walk step blew up");
      g /= std::pow(det, 1.0 / d);
      if (++step % cfg.reduce_every == 0) g = lll_reduce(g);
    };
    for (int i = 0; i < cfg.burn_in; ++i) advance();
    per[c].reserve(want);
    for (int s = 0; s < want; ++s) {
      for (int i = 0; i < cfg.thin; ++i) advance();
      per[c].push_back({GroupElement::normalized(g), "walk_d" + std::to_string(d), 1.0});
    }
  }
  std::vector<LatticeSample> out;
  out.reserve(n);
  for (auto& v : per)
    for (auto& s : v) out.push_back(std::move(s));
  return out;
}

double discrepancy(const LatticeSample& s, double R) {
  if (!(R > 0)) throw std::invalid_argument("R must be positive");
  const int d = s.basis.dim();
  const Matrix& g = s.basis.mat();
  QuadForm q(g.transpose() * g);
  auto r = count_primitive_moebius(EllipsoidSpec(q, R), CountMode::Float, 1);
  const double vol = unit_ball_volume(d) * std::pow(R, d);
  if (*r.n1 == 0) return 1.0;
  return std::abs(zeta(d) * double(*r.n1) / vol - 1.0);
}

namespace {

struct Kahan {
  double sum = 0, c = 0;
  void add(double x) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

double mean_of(const std::vector<double>& v, std::size_t lo, std::size_t hi) {
  Kahan k;
  for (std::size_t i = lo; i < hi; ++i) k.add(v[i]);
  return k.sum / double(hi - lo);
}

}  // namespace

MeanSquareReport mean_square_from_samples(int d, double R, const std::vector<LatticeSample>& samples,
                                          bool batch_means) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  MeanSquareReport rep;
  rep.d = d;
  rep.R = R;
  rep.n_samples = static_cast<int>(samples.size());
  rep.sampler = samples.front().origin_tag;
  std::vector<double> d2(samples.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double D = discrepancy(samples[i], R);
    d2[i] = D * D;
  }
  const std::size_t n = d2.size();
  rep.mean_D2 = mean_of(d2, 0, n);
  if (n >= 2) {
    rep.std_error_defined = true;
    if (batch_means && n >= 40) {
      const std::size_t B = 20, len = n / B;
      std::vector<double> bm;
      for (std::size_t b = 0; b < B; ++b) bm.push_back(mean_of(d2, b * len, (b + 1) * len));
      double m = mean_of(bm, 0, B);
      Kahan v;
      for (double x : bm) v.add((x - m) * (x - m));
      rep.std_error = std::sqrt(v.sum / double(B - 1) / double(B));
    } else {
      Kahan v;
      for (double x : d2) v.add((x - rep.mean_D2) * (x - rep.mean_D2));
      rep.std_error = std::sqrt(v.sum / double(n - 1) / double(n));
    }
  }
  const double vol = unit_ball_volume(d) * std::pow(R, d);
  const double z = zeta(d);
  rep.bound = (d == 2 ? 4.0 : 2.0) * z / vol;
  const double to_e1 = vol * vol / (z * z);
  rep.mean_E1sq = rep.mean_D2 * to_e1;
  rep.bound_E1 = rep.bound * to_e1;
  rep.passed = rep.mean_D2 - 2 * rep.std_error <= rep.bound;
  return rep;
}

std::vector<LatticeSample> draw(const SamplerConfig& cfg, int d, int n) {
  if (cfg.kind == SamplerConfig::Kind::Exact) {
    if (d != 2) throw std::invalid_argument("the exact sampler supports d = 2 only");
    auto rng = stream(cfg.seed, 0);
    return sample_exact_d2(rng, n);
  }
  WalkConfig w = cfg.walk;
  w.d = d;
  return sample_walk(cfg.seed, w, n, cfg.threads);
}

MeanSquareReport mean_square_check(int d, double R, int n_samples, const SamplerConfig& cfg) {
  auto samples = draw(cfg, d, n_samples);
  return mean_square_from_samples(d, R, samples, cfg.kind == SamplerConfig::Kind::Walk);
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double best = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    best = std::max(best, std::abs(double(i) / a.size() - double(j) / b.size()));
  }
  return best;
}

double siegel_l2_norm(const RadialProfile& h, int n, std::uint64_t seed) {
  auto rng = stream(seed, 0);
  auto samples = sample_exact_d2(rng, n);
  std::vector<double> f2(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Matrix& g = samples[i].basis.mat();
    double f = eval_test_function(QuadForm(g.transpose() * g), h);
    f2[i] = f * f;
  }
  return std::sqrt(mean_of(f2, 0, f2.size()));
}

}  // namespace horocount
