#pragma once

#include <string>
#include <vector>

namespace suburban {

struct CheckResult {
  std::string name;
  bool passed;
  std::string detail;
};

/// Fast invariant checks over every module (a few seconds on one core).
std::vector<CheckResult> run_selfcheck();

}  // namespace suburban
