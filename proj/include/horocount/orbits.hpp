#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "horocount/latcount.hpp"

namespace horocount {

double t_of_radius(int d, double R);
double radius_of_t(int d, double T);

// Order of the stabilizer of Q in PSL_d(Z) (d in {2,3,4}).
std::int64_t stabilizer_order(const QuadForm& q, std::int64_t candidate_limit = 100000);

struct ChimneyCount {
  double T = 0, R = 0;
  std::int64_t count = 0;
  std::int64_t sigma_q = 1;
  double predicted = 0;
  double rel_error = 0;
  std::int64_t n1 = 0;
  std::int64_t boundary_ambiguous = 0;
  bool sigma_assumed = false;  // d >= 5 without a supplied sigma
};

ChimneyCount chimney_count(const QuadForm& q, double T, std::optional<std::int64_t> sigma = std::nullopt,
                           int threads = 0);
ChimneyCount horoball_count(const QuadForm& q, double T, int threads = 0);

struct DecayFit {
  double slope = 0, intercept = 0, r2 = 0;
  int n_points = 0;
  bool envelope = false;
};

// Least squares of log|y| against x; with envelope only strict local maxima of |y|.
DecayFit fit_error_exponent(std::vector<std::pair<double, double>> series, bool envelope);

// (num/den) * sqrt(rad_num/rad_den), negative for decay.
struct SurdExponent {
  long num, den, rad_num, rad_den;
  double value() const;
};
SurdExponent theory_slope(int d);

}  // namespace horocount
