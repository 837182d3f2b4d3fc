#pragma once

#include "hallspde/integrator.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hallspde {

inline constexpr const char* tool_version = "0.1.0";

/// Spatial profile a * p cos(k . x) placed on u, B or both.
struct ModeProfile {
    double amplitude = 0.0;
    std::array<int, 3> wavevector{1, 0, 0};
    std::array<double, 3> polarization{0.0, 1.0, 0.0};
    std::string target = "both";
};

struct MarkSpec {
    std::string id;
    double weight = 0.0;
    double scale = 0.0;  ///< c(y), multiplicative noise only
    ModeProfile profile;
};

struct WienerColumnSpec {
    double sigma = 0.0;  ///< linear driver only
    ModeProfile profile;
};

/// Every setting of a run in the form it is read and echoed.
struct RunSpec {
    int N = 16;
    double L = 6.283185307179586;

    PhysParams physics;
    bool nonlinear = true;

    double T = 0.1;
    double dt = 1e-3;
    double cutoff = 4.0;
    std::uint64_t seed = 0;
    std::size_t ensemble = 1;
    std::vector<int> q{2, 4};
    double guard_radius = 0.0;
    std::size_t snapshot_every = 0;

    std::string init_kind = "zero";
    double init_amplitude_u = 0.0;
    double init_amplitude_B = 0.0;
    std::array<int, 3> init_mode{1, 0, 0};
    std::array<double, 3> init_polarization{0.0, 1.0, 0.0};
    int init_max_mode = 2;

    std::string forcing_kind = "none";
    double forcing_amplitude_u = 0.0;
    double forcing_amplitude_B = 0.0;

    std::string noise_kind = "none";
    std::vector<MarkSpec> marks;

    std::string wiener_kind = "none";
    std::vector<WienerColumnSpec> wiener;
    double wiener_a = 2.0;
    double wiener_lambda = 0.0;
    double wiener_rho = 0.0;

    /// Builds and validates the solver configuration.
    SimConfig build() const;
};

/// Reads a sectioned key = value file. Full-line comments start with '#' or
/// ';'. Unknown sections and keys are rejected; every error names its key.
RunSpec parse_run_spec(std::istream& in, const std::string& source = "<config>");
RunSpec load_run_spec(const std::filesystem::path& path);

/// load_run_spec(path).build()
SimConfig parse_config(const std::filesystem::path& path);

/// Resolved configuration with all defaults, in a form parse_run_spec accepts.
void write_config(std::ostream& out, const RunSpec& spec);
std::string resolved_config(const RunSpec& spec);

/// FNV-1a over the resolved configuration text.
std::uint64_t config_hash(const RunSpec& spec);

enum class CommandKind { simulate, ensemble, study, verify };
const char* command_name(CommandKind kind);

struct RunManifest {
    RunSpec spec;
    std::filesystem::path out_dir;
    CommandKind kind = CommandKind::simulate;
    std::string version = tool_version;
    std::uint64_t hash = 0;
};

RunManifest make_manifest(RunSpec spec, std::filesystem::path out_dir, CommandKind kind);

/// manifest.txt: '#' header lines, then the resolved configuration.
void write_manifest(const RunManifest& manifest);

} // namespace hallspde
