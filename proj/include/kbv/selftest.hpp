#pragma once

// The numerical invariant suite behind `kbv selftest`.

#include <cstdint>
#include <string>
#include <vector>

namespace kbv {

struct CheckResult {
  std::string suite;
  std::string name;
  /// Measured quantity and the bound it is held to (value <= tolerance passes,
  /// unless the check says otherwise in `detail`).
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

/// Reference star norms of 8x8 dipoles (h = 1/8) from an independent conic solver.
struct DipoleReference {
  int plus_i, plus_j, minus_i, minus_j;
  double value;
};
const std::vector<DipoleReference>& dipole_references();

std::vector<CheckResult> run_selftest(std::uint64_t seed);

}  // namespace kbv
