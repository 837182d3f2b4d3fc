#pragma once

#include "hallspde/config.hpp"

#include <vector>

namespace hallspde {

struct CommandOptions {
    unsigned jobs = 1;
    bool force = false;
    std::vector<double> levels;  ///< study only
};

/// Exit status 0 on success. Each command refuses an output directory that
/// already holds a manifest unless options.force is set, then writes the
/// manifest before any other output.
int cmd_simulate(const RunManifest& manifest, const CommandOptions& options);
int cmd_ensemble(const RunManifest& manifest, const CommandOptions& options);
int cmd_study(const RunManifest& manifest, const CommandOptions& options);
/// Exit status 0 iff every property suite passes; failed checks go to failures.txt.
int cmd_verify(const RunManifest& manifest, const CommandOptions& options);

} // namespace hallspde
