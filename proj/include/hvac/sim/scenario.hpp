#pragma once

#include <cstdint>
#include <string>

#include "hvac/sim/types.hpp"

namespace hvac::sim {

struct ScenarioReport {
  int id = 0;
  bool passed = false;
  std::string description;  // condition and expected outcome
  std::string detail;       // measured quantities behind the verdict
  SessionRecord trace;
};

inline constexpr int kScenarioCount = 6;

/// Runs one of the six validation scenarios and evaluates its predicate.
ScenarioReport run_scenario(int scenario_id, std::uint64_t seed = 7);

}  // namespace hvac::sim
