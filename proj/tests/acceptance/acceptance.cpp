#include <cstdio>
#include <cstdlib>
#include <cstring>

#include "stathyp/verify.hpp"

int main(int argc, char** argv) {
  stathyp::SuiteOptions options;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--seed") == 0 && i + 1 < argc) options.seed = std::strtoull(argv[++i], nullptr, 0);
  }
  int failures = 0;
  std::printf("acceptance seed 0x%llX\n", static_cast<unsigned long long>(options.seed));
  for (const stathyp::Criterion& c : stathyp::criteria()) {
    const stathyp::CriterionResult r = stathyp::run_criterion(c, options);
    std::printf("%s [%2d] %s: %s (%s) %.2fs\n", r.passed ? "PASS" : "FAIL", r.id, r.module.c_str(), r.name.c_str(),
                r.detail.c_str(), r.seconds);
    std::fflush(stdout);
    if (!r.passed) ++failures;
  }
  std::printf("%d of %zu criteria failed\n", failures, stathyp::criteria().size());
  return failures == 0 ? 0 : 1;
}
