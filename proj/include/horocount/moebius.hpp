#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "horocount/latcount.hpp"

namespace horocount {

struct MoebiusTable {
  std::int64_t limit = 0;
  std::vector<std::int8_t> mu;  // mu[0] unused

  int operator()(std::int64_t k) const { return mu.at(static_cast<std::size_t>(k)); }
};

MoebiusTable sieve(std::int64_t limit);
std::int64_t mertens(const MoebiusTable& table, std::int64_t n);

// r0(x) = sum_{k^2 | x} r1(x/k^2) and its inverse, for x >= 1 (index 0 ignored).
std::vector<std::int64_t> shells_from_primitive(const std::vector<std::int64_t>& r1);
std::vector<std::int64_t> primitive_from_shells(const std::vector<std::int64_t>& r0);

struct ShellViolation {
  std::int64_t level;
  std::string identity;
  std::int64_t lhs, rhs;
};

struct InversionReport {
  bool ok = true;
  std::int64_t levels_checked = 0;
  std::optional<ShellViolation> first_violation;
};

// Needs an integral Gram matrix; checks every integer level 1 <= x <= R^2.
InversionReport verify_inversion(const EllipsoidSpec& spec);

struct RelationReport {
  double lhs_e1, rhs_e1, residual_e1, budget_e1;
  double lhs_e0, rhs_e0, residual_e0, budget_e0;
  bool passed;
};

// Evaluates E_1 = sum_k mu(k) E_0(R/k) - w R^d sum_{k>R} mu(k)/k^d and
// E_0 = sum_k E_1(R/k) - (w/zeta) R^d sum_{k>R} k^{-d}.
RelationReport error_relation_check(const EllipsoidSpec& spec, std::int64_t tail_terms = 1'000'000);

}  // namespace horocount
