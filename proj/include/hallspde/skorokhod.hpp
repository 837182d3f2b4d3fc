#pragma once

#include <span>
#include <utility>
#include <vector>

namespace hallspde {

struct Trajectory;

/// Real-valued cadlag path on [0, T] with finitely many breakpoints.
///
/// Piece i covers [t_i, t_{i+1}) (t_p = T) and runs linearly from the right
/// value v_i to the left limit l_{i+1}; l_{i+1} == v_i gives a step function.
/// The value at T is the last left limit.
class CadlagPath {
public:
    /// Step function: value v_i on [t_i, t_{i+1}). times[0] must be 0.
    static CadlagPath piecewise_constant(double horizon, std::vector<double> times, std::vector<double> values);

    /// left_limits[i] is the limit from the left at times[i + 1] (or at T for the last piece).
    CadlagPath(double horizon, std::vector<double> times, std::vector<double> values, std::vector<double> left_limits);

    double horizon() const { return horizon_; }
    std::span<const double> breakpoints() const { return times_; }
    std::size_t pieces() const { return times_.size(); }

    double value(double t) const;
    double left_limit(double t) const;

    double right_value(std::size_t piece) const { return values_[piece]; }
    double end_value(std::size_t piece) const { return ends_[piece]; }

private:
    std::size_t piece_at(double t) const;

    double horizon_;
    std::vector<double> times_;
    std::vector<double> values_;
    std::vector<double> ends_;
};

/// sqrt(|X|^2_H) along a trajectory: linear between samples, jumps at jump times.
CadlagPath norm_path(const Trajectory& trajectory);

/// Cadlag modulus w(u, delta): smallest achievable max oscillation over
/// partitions of [0, T] with every interval at least delta long. Exact for
/// step functions. With sloped pieces the result is the smaller of two upper
/// bounds (whole-piece ranges, and partitions through breakpoints shifted by
/// multiples of delta, capped at 4000 points). delta >= T yields the
/// oscillation over the whole interval.
double skorokhod_modulus(const CadlagPath& path, double delta);

/// Oscillation sup_{a <= s < t < b} |u(t) - u(s)|.
double oscillation(const CadlagPath& path, double a, double b);

/// Increasing piecewise-linear time change through the knots (a_i, lambda(a_i)).
/// (0,0) and (T,T) are added when absent.
using TimeChange = std::vector<std::pair<double, double>>;

/// sup|u - v o lambda| + sup|t - lambda(t)| + sup|log slope| for one lambda.
double skorokhod_candidate_cost(const CadlagPath& u, const CadlagPath& v, const TimeChange& lambda);

/// Upper bound on the Skorokhod distance: the identity first, then a
/// search over piecewise-linear time changes mapping breakpoints of u onto
/// breakpoints of v, then every caller-supplied candidate.
double skorokhod_distance(const CadlagPath& u, const CadlagPath& v, std::span<const TimeChange> candidates = {});

} // namespace hallspde
