#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "horocount/quadform.hpp"

namespace horocount {

// Exact rational value num/den for R^2 in exact mode.
struct Rational {
  std::int64_t num;
  std::int64_t den;
};

struct EllipsoidSpec {
  QuadForm form;
  double radius;
  std::optional<Rational> radius_sq;  // required by exact mode

  EllipsoidSpec(QuadForm f, double r);
  static EllipsoidSpec exact(QuadForm f, std::int64_t num, std::int64_t den = 1);
  double bound() const;  // R^2
};

enum class CountMode { Float, Exact };

struct CountResult {
  std::optional<std::int64_t> n0, n1;
  std::optional<double> e0, e1;
  std::int64_t boundary_ambiguous = 0;
  CountMode mode = CountMode::Float;
};

// threads <= 0 uses the OpenMP default.
CountResult count_full(const EllipsoidSpec& spec, CountMode mode = CountMode::Float, int threads = 0);
CountResult count_full_serial(const EllipsoidSpec& spec, CountMode mode = CountMode::Float);
CountResult count_primitive_direct(const EllipsoidSpec& spec, CountMode mode = CountMode::Float);
CountResult count_primitive_moebius(const EllipsoidSpec& spec, CountMode mode = CountMode::Float,
                                    int threads = 0);
CountResult error_terms(const EllipsoidSpec& spec, CountMode mode = CountMode::Float, int threads = 0);

struct ShellCounts {
  std::vector<std::int64_t> r0, r1;
};
ShellCounts shell_counts(const EllipsoidSpec& spec, const std::vector<double>& xs,
                         CountMode mode = CountMode::Float);

// r0[x], r1[x] for every integer level 0 <= x <= max_level of an integral form.
ShellCounts shell_tables(const QuadForm& form, std::int64_t max_level);

double reference_exponent(int d);

// Smallest k0 with N_0(R/k) = 1 for all k >= k0 (a safe upper bound).
std::int64_t moebius_cutoff(const QuadForm& form, double radius);

// Calls visit(v, q) for every v with Q(v) <= bound, origin included.
// Serial; throws std::runtime_error past node_budget visited nodes.
using PointVisitor = std::function<void(std::span<const std::int64_t>, double)>;
void for_each_point(const QuadForm& form, double bound, const PointVisitor& visit,
                    std::int64_t node_budget = 100'000'000);

std::int64_t gcd_of(std::span<const std::int64_t> v);

namespace detail {

// Reusable enumeration state for one form at a time; cheap to re-target.
class Walker {
 public:
  explicit Walker(int d);
  // gram is row-major d*d and positive definite.
  void set_form(const double* gram);
  void set_integer_form(const std::int64_t* gram);  // also calls set_form

  struct Tally {
    std::int64_t count = 0;
    std::int64_t ambiguous = 0;
  };
  // Closed-form interval counting at the innermost level.
  Tally count_float(double bound, int threads) const;
  Tally count_exact(Rational bound, int threads) const;

  // Sum of h(Q(v)) over primitive v with Q(v) <= bound (closed).
  template <class H>
  double primitive_sum(double bound, H&& h);

  // Visits all points (origin included), in original coordinates.
  template <class F>
  void visit(double bound, F&& f);

  std::int64_t node_budget = 100'000'000;

 private:
  int d_;
  std::vector<int> perm_;        // level -> original coordinate; level 0 is innermost
  std::vector<double> g_;        // permuted gram
  std::vector<std::int64_t> gi_;  // permuted integer gram
  std::vector<double> l_;        // Cholesky factor of permuted gram (lower, row-major)
  bool integral_ = false;

  // scratch
  std::vector<std::int64_t> v_;
  std::vector<std::int64_t> orig_;

  double max_extent_ = 0.0;  // max_j sqrt((M^{-1})_jj)

  template <class Leaf>
  void descend(int level, double remaining, std::int64_t* v, std::int64_t& nodes, Leaf& leaf) const;
  template <class MakeLeaf>
  Tally run_count(double prune, int threads, MakeLeaf&& make_leaf) const;
  void check_extent(double bound) const;
  void leaf_coeffs(const std::int64_t* v, double& a, double& b, double& c) const;
};

}  // namespace detail
}  // namespace horocount

#include "horocount/latcount_impl.hpp"
