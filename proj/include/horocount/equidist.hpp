#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "horocount/orbits.hpp"
#include "horocount/quadform.hpp"

namespace horocount {

struct RadialProfile {
  enum class Kind { Indicator, Bump };
  Kind kind = Kind::Indicator;
  double support_end = 1.0;  // s
  double plateau = 0.0;      // p, bump only: h = 1 on [0,p], cubic C^1 taper on [p,s]

  static RadialProfile indicator(double s);
  static RadialProfile bump(double s, double p = 0.0);

  double operator()(double u) const;
  double integral(int d) const;  // I_h(d) = int_{R^d} h(|x|^2) dx
};

struct QuadratureSpec {
  int torus_grid = 27;                 // per torus dimension, lower bound
  double torus_resolution = 0.0;       // if > 0: grid >= resolution * e^{(lambda+mu) t / 2}
  std::array<int, 2> base_grid{27, 27};  // d = 3: x and log y directions
  std::optional<double> base_cutoff_height;  // Y(t); default e^{alpha t / sqrt 2}, at least 1
  double alpha = 1.0;
  double reference_alpha = 3.0;  // truncated_average comparison level
  int refinement_factor = 3;     // odd, so coarse midpoint nodes are fine nodes
  bool strict = true;            // throw on non-convergence
  int threads = 0;
};

struct HoroAverage {
  double t = 0, value = 0, target = 0, err = 0;
  double quad_error_estimate = 0;
  bool converged = true;
  int torus_grid = 0;
  std::array<int, 2> base_grid{0, 0};
  double cutoff_height = 0;
};

// Sum of h(Q(v)) over primitive v.
double eval_test_function(const QuadForm& q, const RadialProfile& h);
double space_average(const RadialProfile& h, int d);

// Gram matrix of iota(base) diag(e^{-lambda t/2} I, e^{mu t/2}) [[I,0],[x^T,1]].
Matrix fiber_gram(double t, const Matrix& base_gram, const Vector& x);

// Midpoint average over the (d-1)-torus with grid^(d-1) nodes.
double fiber_integral(double t, const GroupElement& base_point, const RadialProfile& h, int grid,
                      int threads = 0);
double fiber_integral_serial(double t, const GroupElement& base_point, const RadialProfile& h, int grid);

HoroAverage horosphere_average(int d, double t, const RadialProfile& h, const QuadratureSpec& q);

struct DecaySeries {
  std::vector<HoroAverage> samples;
  DecayFit fit;
  double slope_thm12 = 0, slope_thm11 = 0, slope_edwards = 0;
  std::optional<double> slope_rh;
  bool faster_than_thm12 = false;
};
DecaySeries decay_series(int d, const RadialProfile& h, const std::vector<double>& t_grid,
                         const QuadratureSpec& q);

struct LocatorParams {
  double alpha, beta, eps, kappa, ctilde;
  double phi(double t) const;  // (4 C / kappa) e^{-eps t}
  double t0() const;           // (1/eps) log(2 C (beta + eps) / kappa)
  double threshold(double t) const;
};
std::vector<double> good_t_locator(const std::vector<std::pair<double, double>>& g, const LocatorParams& p);

struct GapReport {
  int windows = 0, empty = 0;
  double first_empty = 0;
  bool ok() const { return windows > 0 && empty == 0; }
};
// Windows [T, T + length(T)] for n_windows values T evenly spaced in [start, start + span].
GapReport check_windows(const std::vector<double>& hits, double start, double span, int n_windows,
                        const LocatorParams& window_params);

struct BoundReport {
  int checked = 0, failed = 0;
  double worst_ratio = 0, worst_t = 0;
  bool passed = false;
};
// |err| - quad_err <= (C_d |f| + 4 grad) e^{-sqrt((d-1)d) t / 8} for t >= T_d.
BoundReport check_thm12_bound(const std::vector<HoroAverage>& series, double f_norm, double grad_bound, int d);

// 10 * max |F(t + dt) - F(t)| / dt over the given t.
double lipschitz_along_flow(int d, const RadialProfile& h, const std::vector<double>& ts, const QuadratureSpec& q,
                            double dt = 1e-3);

struct IntegratedReport {
  double T = 0, lhs = 0, rhs = 0, budget = 0;
  bool passed = false;
};
// int_{-inf}^T e^{t sqrt((d-1)d)/2} (F(t) - target) dt against C_d |f| e^{T sqrt((d-1)d)/4}.
std::vector<IntegratedReport> integrated_error_check(int d, const RadialProfile& h, const std::vector<double>& Ts,
                                                     double f_norm, const QuadratureSpec& q, double dt = 0.02);

struct TruncationReport {
  HoroAverage truncated;
  double reference = 0;
  double difference = 0;
  double theta_alpha = 0;    // rate theta * alpha
  double scaled = 0;         // difference * e^{theta alpha t}
};
TruncationReport truncated_average(double t, double alpha, const RadialProfile& h, const QuadratureSpec& q);

double shortest_primitive_value(const QuadForm& q);

struct CuspReport {
  bool inside = false;
  double max_shortest = 0, threshold = 0;
};
CuspReport cusp_orbit_check(const GroupElement& base_point, double t, double a, int grid = 16);

struct ScalingReport {
  double ratio = 0, expected = 0, rel_diff = 0, quad_error = 0;
};
// Unnormalized torus volume of a fixed weight K(x) at level t over level 0.
ScalingReport torus_volume_scaling(int d, double t, int grid = 27);

}  // namespace horocount
