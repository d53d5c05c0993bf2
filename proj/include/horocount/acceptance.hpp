#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace horocount {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0;
  double limit_seconds = 0;
  std::string detail;
};

struct AcceptanceOptions {
  int threads = 0;
  std::uint64_t seed = 20240607;
};

// Criteria 1..10.
CriterionResult run_criterion(int id, const AcceptanceOptions& opt);
std::vector<int> fast_suite();
std::vector<int> full_suite();
std::string format_line(const CriterionResult& r);

}  // namespace horocount
