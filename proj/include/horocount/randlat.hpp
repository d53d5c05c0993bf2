#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "horocount/equidist.hpp"
#include "horocount/quadform.hpp"

namespace horocount {

// Columns span g Z^d. Walk samples are coset representatives, not reduced forms.
struct LatticeSample {
  GroupElement basis;
  std::string origin_tag;
  double weight = 1.0;
};

std::uint64_t splitmix64(std::uint64_t& state);
// Independent generator for stream `index` of a run seeded with `seed`.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t index);

// Point of the modular fundamental domain with density proportional to 1/y^2.
std::complex<double> sample_modular_point(std::mt19937_64& rng);
std::vector<LatticeSample> sample_exact_d2(std::mt19937_64& rng, int n);

struct WalkConfig {
  int d = 2;
  double step_sigma = 0.5;
  int burn_in = 1000;
  int thin = 10;
  int chains = 8;
  int reduce_every = 1;
};
std::vector<LatticeSample> sample_walk(std::uint64_t seed, const WalkConfig& cfg, int n, int threads = 0);

// LLL on the columns of g (delta = 0.99); returns g*gamma with gamma in SL_d(Z).
Matrix lll_reduce(const Matrix& g);

double discrepancy(const LatticeSample& s, double R);

struct MeanSquareReport {
  int d = 0;
  double R = 0;
  int n_samples = 0;
  double mean_D2 = 0, std_error = 0;
  double bound = 0;       // on the mean of D^2
  double mean_E1sq = 0;   // same quantity in the |E_1|^2 normalization
  double bound_E1 = 0;
  bool std_error_defined = false;
  bool passed = false;
  std::string sampler;
};

struct SamplerConfig {
  enum class Kind { Exact, Walk };
  Kind kind = Kind::Exact;
  WalkConfig walk;
  std::uint64_t seed = 1;
  int threads = 0;
};

std::vector<LatticeSample> draw(const SamplerConfig& cfg, int d, int n);
MeanSquareReport mean_square_check(int d, double R, int n_samples, const SamplerConfig& cfg);
MeanSquareReport mean_square_from_samples(int d, double R, const std::vector<LatticeSample>& samples,
                                          bool batch_means = false);

// Two-sample Kolmogorov-Smirnov distance.
double ks_distance(std::vector<double> a, std::vector<double> b);

// sqrt of the Monte Carlo mean of f(L)^2, f the primitive Siegel transform of h (d = 2, exact sampler).
double siegel_l2_norm(const RadialProfile& h, int n, std::uint64_t seed);

}  // namespace horocount
