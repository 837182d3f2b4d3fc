#pragma once

#include "hallspde/mhd_operators.hpp"
#include "hallspde/spectral_space.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace hallspde {

using Rng = std::mt19937_64;

/// Independent random sub-streams of one trajectory.
enum class Substream : std::uint64_t { jumps = 0, wiener = 1, initial = 2 };

/// Counter-based seed: splitmix64 mixing of (master, trajectory, substream).
std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t trajectory, Substream stream);

struct Mark {
    std::string id;
    double weight = 0.0;  ///< intensity mu({y}), events per unit time
};

/// Finite mark space with intensity measure mu.
class MarkSpace {
public:
    MarkSpace() = default;
    explicit MarkSpace(std::vector<Mark> marks);

    std::size_t size() const { return marks_.size(); }
    const Mark& operator[](std::size_t i) const { return marks_.at(i); }
    std::span<const Mark> marks() const { return marks_; }
    double total_mass() const;
    double mass_of(std::span<const std::size_t> subset) const;

private:
    std::vector<Mark> marks_;
};

struct JumpEvent {
    double time;
    std::size_t mark;
};

/// One realization of the Poisson random measure on (0, T] x Y.
struct JumpStream {
    double horizon = 0.0;
    std::vector<JumpEvent> events;

    /// eta((0, t] x A)
    std::size_t count(double t, std::span<const std::size_t> subset) const;
    std::size_t count(double t) const;
};

JumpStream sample_jump_stream(const MarkSpace& marks, double horizon, Rng& rng);

/// CSV dump: header "time,mark_id", one row per event.
void write_jump_csv(std::ostream& out, const JumpStream& stream, const MarkSpace& marks);

/// Composite 5-point Gauss-Legendre rule on [0, T]: 32 uniform panels, further
/// split at `breaks`. Returns (node, weight) pairs.
std::vector<std::pair<double, double>> time_quadrature(double horizon, std::span<const double> breaks = {});

/// sum_i xi(t_i, y_i) - int_0^T sum_y xi(s, y) mu(y) ds.
/// `Value` needs copy, += and scalar *=; `zero` is the additive identity.
template <class Value, class Integrand>
Value compensated_integral(Integrand&& xi, const JumpStream& stream, const MarkSpace& marks, Value zero,
                           std::span<const double> breaks = {})
{
    Value jumps = zero;
    for (const auto& e : stream.events)
        jumps += xi(e.time, e.mark);
    Value drift = zero;
    for (const auto& [s, w] : time_quadrature(stream.horizon, breaks)) {
        for (std::size_t y = 0; y < marks.size(); ++y) {
            if (marks[y].weight == 0.0)
                continue;
            Value term = xi(s, y);
            term *= w * marks[y].weight;
            drift += term;
        }
    }
    drift *= -1.0;
    jumps += drift;
    return jumps;
}

enum class NoiseKind { additive, linear_multiplicative, user };

/// Jump coefficient F(t, X; y).
///
/// additive:              F = d(y)
/// linear_multiplicative: F = c(y) X + d(y)
/// user:                  F = user(t, X, y)
/// Every output is Leray-projected so jumps keep states solenoidal.
struct NoiseCoefficient {
    NoiseKind kind = NoiseKind::additive;
    std::vector<double> scale;      ///< c(y)
    std::vector<State> amplitude;   ///< d(y)
    std::function<State(double, const State&, std::size_t)> user;
    double lipschitz = 0.0;               ///< declared L
    std::map<int, double> growth;         ///< declared K_q

    /// Zero coefficient with `marks` entries on `grid`.
    static NoiseCoefficient zero(const WaveGrid& grid, std::size_t marks);
};

State eval_F(const NoiseCoefficient& coefficient, double t, const State& state, std::size_t mark);

/// sum_y mu(y) F(t, X; y), the compensator density.
State compensator(const NoiseCoefficient& coefficient, const MarkSpace& marks, double t, const State& state);

struct AuditResult {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds() const { return lhs <= rhs; }
};

/// sum_y mu(y) |F(t,a;y) - F(t,b;y)|^2 against L |a - b|^2.
AuditResult audit_lipschitz(const NoiseCoefficient& coefficient, const MarkSpace& marks, double t, const State& a,
                            const State& b);

/// sum_y mu(y) |F(t,a;y)|^q against K_q (1 + |a|^q).
AuditResult audit_growth(const NoiseCoefficient& coefficient, const MarkSpace& marks, double t, const State& a,
                         int q);

/// Finite-dimensional Wiener forcing sum_j G_j(t, X) dW_j.
///
/// zero:     G_j = 0
/// additive: G_j = g_j
/// linear:   G_j = g_j + sigma_j X
struct WienerDriver {
    enum class Kind { zero, additive, linear, user };

    Kind kind = Kind::zero;
    std::size_t dimension = 0;
    std::vector<State> columns;   ///< g_j
    std::vector<double> sigma;    ///< sigma_j
    std::function<std::vector<State>(double, const State&)> user;
    double a = 2.0;
    double lambda = 0.0;
    double rho = 0.0;
};

/// i.i.d. N(0, dt) per direction; dt = 0 gives zeros, dt < 0 throws.
std::vector<double> sample_wiener_increment(const WienerDriver& driver, double dt, Rng& rng);

std::vector<State> eval_G(const WienerDriver& driver, double t, const State& state);

/// ||G(t,X)||_HS^2 against (2 - a)||X||^2 + lambda |X|^2 + rho.
AuditResult audit_wiener_growth(const WienerDriver& driver, const PhysParams& params, double t, const State& state);

} // namespace hallspde
