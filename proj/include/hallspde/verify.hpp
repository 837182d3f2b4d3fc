#pragma once

#include "hallspde/integrator.hpp"

#include <string>
#include <vector>

namespace hallspde {

struct CheckResult {
    std::string suite;
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Invariant suites of every module, evaluated on the configuration's grid,
/// level and physics. Random inputs are seeded from config.seed.
std::vector<CheckResult> run_property_suites(const SimConfig& config);

} // namespace hallspde
