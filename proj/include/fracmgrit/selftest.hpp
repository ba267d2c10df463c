#pragma once

#include <string>
#include <vector>

namespace fracmgrit {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestReport {
  std::vector<SelftestCheck> checks;
  int failures() const;
  std::string summary() const;
};

/// Dense-oracle invariant suite on small grids (M <= 8, N <= 64). With
/// inject_fault one stiffness generator entry is perturbed first.
SelftestReport run_selftest(bool inject_fault = false);

}  // namespace fracmgrit
