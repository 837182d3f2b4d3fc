#pragma once

#include "hallspde/integrator.hpp"
#include "hallspde/spectral_space.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace hallspde {

// ---------------------------------------------------------------------------
// Stochastic Gronwall lemma

/// Constants and sampled processes of the stochastic Gronwall lemma.
/// Processes are optional; when present they are indexed [sample][time].
struct GronwallInput {
    double C = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double delta = 0.0;
    double C_tilde = 0.0;
    std::vector<double> Z;

    std::vector<double> times;
    std::vector<std::vector<double>> X;
    std::vector<std::vector<double>> Y;
    std::vector<std::vector<double>> I;
    std::vector<std::vector<double>> phi;

    /// Throws std::invalid_argument naming the first failed condition:
    /// non-negativity, 2 beta e^C <= 1, 2 delta e^C <= alpha, I non-decreasing,
    /// int phi <= C.
    void validate() const;
};

/// 2 exp(C + 2 t gamma e^C) (E[Z] + C_tilde), after validation.
double gronwall_bound(const GronwallInput& input, double t);

struct GronwallCheck {
    bool holds = true;
    double worst_ratio = 0.0;  ///< max_t E[X + alpha Y](t) / bound(t)
};

/// Compares the sampled E[X(t) + alpha Y(t)] with the bound at every time.
GronwallCheck check_gronwall(const GronwallInput& input);

// ---------------------------------------------------------------------------
// Moment estimates

/// Per-trajectory ingredients of the moment estimates.
struct MomentSample {
    std::map<int, double> sup_power;       ///< sup_t |X(t)|^q over right values and left limits
    std::map<int, double> weighted_dissipation;  ///< int |X|^{q-2} ||X||^2 dt
    double v_integral = 0.0;               ///< int ||X||_V^2 dt
    bool guard_hit = false;
};

MomentSample moment_sample(const Trajectory& trajectory, std::span<const int> orders);

struct MomentEstimate {
    int q = 2;
    double sup_mean = 0.0;
    double sup_stderr = 0.0;
    double dissipation_mean = 0.0;
    double dissipation_stderr = 0.0;
};

struct MomentReport {
    double level = 0.0;
    std::size_t ensemble_size = 0;
    std::vector<MomentEstimate> estimates;
    double v_integral_mean = 0.0;
    double v_integral_stderr = 0.0;
    double guard_radius = 0.0;
    std::size_t guard_hits = 0;

    const MomentEstimate& at(int q) const;
};

/// Throws on an empty ensemble. Sums are taken over sorted values, so the
/// report does not depend on trajectory order.
MomentReport moment_report(std::span<const MomentSample> samples, std::span<const int> orders, double guard_radius,
                           double level);
MomentReport moment_report(std::span<const Trajectory> ensemble, std::span<const int> orders, double guard_radius,
                           double level);

/// Mean and standard error with order-insensitive summation.
std::pair<double, double> mean_and_stderr(std::vector<double> values);

// ---------------------------------------------------------------------------
// Taylor remainder

/// lhs = | |x+h|^q - |x|^q - q |x|^{q-2} <x,h> |, rhs = c_q (|x|^{q-2} + |h|^{q-2}) |h|^2.
std::pair<double, double> taylor_check(const State& x, const State& h, int q, double c_q);

/// Frozen constants: c_2 = 1/2 (exact) and c_4 = 6.71 (sup of the remainder
/// ratio is 6.7016 at |h|/|x| = 0.3508, h parallel to x).
double frozen_taylor_constant(int q);

// ---------------------------------------------------------------------------
// Aldous increments

enum class StoppingRule { deterministic, first_hitting };

struct AldousOptions {
    std::vector<double> thetas;
    StoppingRule rule = StoppingRule::deterministic;
    double tau = 0.0;            ///< deterministic stopping time (defaults to T/2 when 0)
    double threshold = 0.0;      ///< first-hitting level for |X|_H
    double sobolev = 3.0;        ///< increments measured in dual_norm(., -sobolev)
    double exponent = 2.0;       ///< alpha
};

/// ||X(tau + theta) - X(tau)||^alpha per theta for one trajectory (states kept).
std::vector<double> aldous_increments(const Trajectory& trajectory, const AldousOptions& options, double horizon);

struct AldousReport {
    bool degenerate = false;
    std::vector<double> thetas;
    std::vector<double> means;
    double slope = 0.0;        ///< beta
    double intercept = 0.0;    ///< log C
    double constant = 0.0;     ///< C
    double ci_low = 0.0;       ///< 95% bootstrap interval for beta
    double ci_high = 0.0;
};

/// Log-log regression of the mean increment against theta. Throws for fewer
/// than three theta values.
AldousReport aldous_fit(std::span<const std::vector<double>> increments, const AldousOptions& options);
AldousReport aldous_fit(std::span<const Trajectory> ensemble, const AldousOptions& options, double horizon);

} // namespace hallspde
