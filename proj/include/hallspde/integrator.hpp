#pragma once

#include "hallspde/mhd_operators.hpp"
#include "hallspde/noise.hpp"
#include "hallspde/spectral_space.hpp"

#include <array>
#include <atomic>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <thread>
#include <type_traits>
#include <vector>

namespace hallspde {

/// Initial state descriptor. Fields are built in physical space with
/// kappa = 2*pi/L, then Leray-projected and cut to the level.
///
/// abc:          u = A_u (sin kz + cos ky, sin kx + cos kz, sin ky + cos kx), B likewise with A_B
/// taylor_green: u = A_u (sin x cos y cos z, -cos x sin y cos z, 0) (scaled by kappa), B as abc
/// single_mode:  u = A_u p cos(k . x), B = A_B p cos(k . x)
/// random:       random-phase modes with integer |k| <= max_mode, amplitude ~ (1 + |k|^2)^-1,
///               normalized to physical RMS A_u / A_B
struct InitialCondition {
    enum class Kind { zero, abc, taylor_green, single_mode, random };

    Kind kind = Kind::zero;
    double amplitude_u = 0.0;
    double amplitude_B = 0.0;
    std::array<int, 3> mode{1, 0, 0};
    std::array<double, 3> polarization{0.0, 1.0, 0.0};
    int max_mode = 2;
};

/// Time-independent deterministic forcing f = (A_u abc, A_B abc).
struct Forcing {
    enum class Kind { none, abc };

    Kind kind = Kind::none;
    double amplitude_u = 0.0;
    double amplitude_B = 0.0;
};

struct SimConfig {
    WaveGrid grid{16, 6.283185307179586};
    double cutoff = 4.0;
    PhysParams params;
    bool nonlinear = true;
    double horizon = 0.1;
    double dt = 1e-3;
    InitialCondition initial;
    MarkSpace marks;
    NoiseCoefficient noise;
    WienerDriver wiener;
    Forcing forcing;
    std::vector<int> moment_orders{2, 4};
    std::uint64_t seed = 0;
    std::size_t ensemble_size = 1;
    /// 0 selects the default 1e6 * max(|X0|, 1).
    double guard_radius = 0.0;

    CutoffLevel level() const { return CutoffLevel(cutoff); }
    /// Throws std::invalid_argument naming the offending setting.
    void validate() const;
};

struct SimOptions {
    /// Keep full states at every sample and at jump left limits.
    bool keep_states = false;
};

/// Scalar record at one sample time. Values are right limits; left-limit
/// energies differ from the previous sample only at jump times.
struct Sample {
    double t = 0.0;
    double h_sq = 0.0;
    double dirichlet_sq = 0.0;
    bool jump = false;
    double left_h_sq = 0.0;
    double left_dirichlet_sq = 0.0;
};

struct JumpRecord {
    std::size_t sample = 0;
    std::size_t mark = 0;
    double time = 0.0;
    std::optional<State> left;        ///< X(t-), when states are kept
    std::optional<State> increment;   ///< P_n F(t, X(t-); y) as applied
};

/// Cadlag record of one truncated trajectory. Samples are the step
/// boundaries and jump times in increasing order.
struct Trajectory {
    std::size_t index = 0;
    std::vector<Sample> samples;
    std::vector<State> states;
    std::vector<JumpRecord> jumps;
    JumpStream stream;
    double guard_radius = 0.0;
    bool guard_hit = false;
    double guard_time = 0.0;
    double max_cfl = 0.0;

    bool has_states() const { return !states.empty(); }
    /// Right-continuous evaluation: the last stored state with time <= t.
    const State& state_at(double t) const;
};

State initial_state(const SimConfig& config);

/// Random-phase solenoidal state in H_n with coefficients ~ (1 + |k|^2)^-1,
/// both components scaled to physical RMS `rms`.
State random_solenoidal_state(const WaveGrid& grid, CutoffLevel level, Rng& rng, double rms = 1.0);
State forcing_state(const SimConfig& config);

/// (|X|^2_H, ||X||^2, ||X||^2_V)
std::array<double, 3> energy_of(const State& state, const PhysParams& params);

Trajectory simulate(const SimConfig& config, std::size_t trajectory_index, const SimOptions& options = {});

/// Runs trajectories [0, M) on `jobs` threads and reduces each one as it
/// finishes. Results are ordered by trajectory index.
template <class Reducer>
auto run_ensemble_reduce(const SimConfig& config, unsigned jobs, const SimOptions& options, Reducer&& reduce)
    -> std::vector<std::invoke_result_t<Reducer&, Trajectory&&>>
{
    using Result = std::invoke_result_t<Reducer&, Trajectory&&>;
    const std::size_t count = config.ensemble_size;
    std::vector<std::optional<Result>> slots(count);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                slots[i].emplace(reduce(simulate(config, i, options)));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(count)));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t)
            pool.emplace_back(worker);
    }
    if (failure)
        std::rethrow_exception(failure);

    std::vector<Result> out;
    out.reserve(count);
    for (auto& s : slots)
        out.push_back(std::move(*s));
    return out;
}

std::vector<Trajectory> run_ensemble(const SimConfig& config, unsigned jobs = 1, const SimOptions& options = {});

struct EnergyRow {
    double t;
    double h_sq;
    double dirichlet_sq;
    double v_sq;
    bool jump;
};

std::vector<EnergyRow> energy_series(const Trajectory& trajectory);

/// Header "t,H_norm_sq,dirichlet_sq,V_norm_sq,jump_flag".
void write_energy_csv(std::ostream& out, std::span<const EnergyRow> rows);

/// |X(T)|^2 + 2 int_0^T ||X||^2 dt - |X(0)|^2 by the trapezoid rule on the sample grid.
double energy_balance_residual(const Trajectory& trajectory);

/// (int_0^T |X_a - X_b|^2_H dt)^{1/2} for two trajectories with kept states on
/// the same sample times (same jump stream), trapezoid rule with left limits.
double coupled_l2_distance(const Trajectory& a, const Trajectory& b);

} // namespace hallspde
