#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stathyp {

struct SuiteOptions {
  std::uint64_t seed = 0xC0FFEE;
  // Scales every trial count; 1 runs the full acceptance sizes.
  double fraction = 1.0;
  std::size_t mc_samples = 1'000'000;
};

struct CriterionResult {
  int id = 0;
  std::string module;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

using CriterionFn = CriterionResult (*)(const SuiteOptions&);

struct Criterion {
  int id;
  const char* module;
  const char* name;
  CriterionFn run;
};

// The invariant suites, one per acceptance criterion, in order.
const std::vector<Criterion>& criteria();

// Runs one criterion, converting escaped exceptions into a failure.
CriterionResult run_criterion(const Criterion& c, const SuiteOptions& options);

}  // namespace stathyp
