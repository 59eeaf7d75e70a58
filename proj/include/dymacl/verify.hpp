#pragma once

#include <string>
#include <vector>

namespace dymacl {

struct SuiteResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Self-contained correctness suites: finite-difference gradient checks per
// layer and end-to-end, permutation invariance, loss oracles and the
// environment reward audit. `inject_fault` deliberately corrupts one analytic
// gradient so the harness can prove it catches regressions; the
// DYMACL_FAULT_INJECTION compile definition forces the same path.
std::vector<SuiteResult> run_verification(bool inject_fault = false);

bool all_passed(const std::vector<SuiteResult>& results);

}  // namespace dymacl
