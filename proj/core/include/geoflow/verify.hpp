#pragma once

#include <functional>
#include <string>
#include <vector>

#include "geoflow/assembly.hpp"

namespace geoflow {

struct VerifyCase {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyReport {
  std::vector<VerifyCase> cases;
  bool all_passed() const {
    for (const auto& c : cases) {
      if (!c.passed) return false;
    }
    return true;
  }
};

/// Applied to each freshly assembled operator set before it is used, so a
/// deliberately broken operator can prove the suite has teeth.
using OperatorMutation = std::function<void(OperatorSet&)>;

/// Runs the named invariant suite ("fast" or "full"; "full" is a superset).
/// Throws std::invalid_argument for unknown suite names.
VerifyReport run_verify_suite(const std::string& suite,
                              const OperatorMutation& mutate = {});

}  // namespace geoflow
