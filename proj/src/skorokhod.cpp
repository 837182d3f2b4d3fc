#include "hallspde/skorokhod.hpp"

#include "hallspde/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace hallspde {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Candidate cap for the modulus search; beyond it the result is an upper bound.
constexpr std::size_t max_modulus_candidates = 4000;
// Threshold grid per criterion and image candidates per knot in the distance search.
constexpr std::size_t max_thresholds = 24;
constexpr std::size_t max_images = 12;

void check_same_horizon(const CadlagPath& u, const CadlagPath& v)
{
    if (std::abs(u.horizon() - v.horizon()) > 1e-12 * std::max(1.0, u.horizon()))
        throw std::invalid_argument("skorokhod: paths have different horizons");
}

std::vector<double> thin_thresholds(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (values.size() <= max_thresholds)
        return values;
    std::vector<double> out;
    for (std::size_t k = 0; k < max_thresholds; ++k)
        out.push_back(values[k * (values.size() - 1) / (max_thresholds - 1)]);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// sup |u(t) - v(lambda(t))| for t in [a0, a1), lambda linear from b0 to b1.
double segment_sup(const CadlagPath& u, const CadlagPath& v, double a0, double a1, double b0, double b1)
{
    const double slope = (b1 - b0) / (a1 - a0);
    std::vector<double> cuts{a0, a1};
    for (double t : u.breakpoints())
        if (t > a0 && t < a1)
            cuts.push_back(t);
    for (double s : v.breakpoints())
        if (s > b0 && s < b1)
            cuts.push_back(std::clamp(a0 + (s - b0) / slope, a0, a1));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    auto lambda = [&](double t) { return t >= a1 ? b1 : b0 + slope * (t - a0); };
    double sup = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
        const double c = cuts[k], d = cuts[k + 1];
        sup = std::max(sup, std::abs(u.value(c) - v.value(lambda(c))));
        sup = std::max(sup, std::abs(u.left_limit(d) - v.left_limit(lambda(d))));
    }
    return sup;
}

TimeChange normalized(const CadlagPath& u, TimeChange lambda)
{
    const double T = u.horizon();
    std::sort(lambda.begin(), lambda.end());
    if (lambda.empty() || lambda.front().first > 0.0)
        lambda.insert(lambda.begin(), {0.0, 0.0});
    if (lambda.back().first < T)
        lambda.emplace_back(T, T);
    if (lambda.front() != std::pair<double, double>{0.0, 0.0} || lambda.back().second != T)
        throw std::invalid_argument("skorokhod: time change must fix 0 and T");
    for (std::size_t i = 1; i < lambda.size(); ++i)
        if (!(lambda[i].first > lambda[i - 1].first) || !(lambda[i].second > lambda[i - 1].second))
            throw std::invalid_argument("skorokhod: time change must be strictly increasing");
    return lambda;
}

} // namespace

CadlagPath CadlagPath::piecewise_constant(double horizon, std::vector<double> times, std::vector<double> values)
{
    std::vector<double> ends = values;
    return CadlagPath(horizon, std::move(times), std::move(values), std::move(ends));
}

CadlagPath::CadlagPath(double horizon, std::vector<double> times, std::vector<double> values,
                       std::vector<double> left_limits)
    : horizon_(horizon), times_(std::move(times)), values_(std::move(values)), ends_(std::move(left_limits))
{
    if (!(horizon_ > 0.0))
        throw std::invalid_argument("cadlag path: horizon must be positive");
    if (times_.empty() || times_.front() != 0.0)
        throw std::invalid_argument("cadlag path: first breakpoint must be 0");
    if (values_.size() != times_.size() || ends_.size() != times_.size())
        throw std::invalid_argument("cadlag path: one value and one left limit per breakpoint");
    for (std::size_t i = 1; i < times_.size(); ++i)
        if (!(times_[i] > times_[i - 1]))
            throw std::invalid_argument("cadlag path: breakpoints must be strictly increasing");
    if (!(times_.back() < horizon_))
        throw std::invalid_argument("cadlag path: breakpoints must lie in [0, T)");
}

std::size_t CadlagPath::piece_at(double t) const
{
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return it == times_.begin() ? 0 : static_cast<std::size_t>(it - times_.begin()) - 1;
}

double CadlagPath::value(double t) const
{
    if (t >= horizon_)
        return ends_.back();
    const std::size_t i = piece_at(t);
    const double t1 = i + 1 < times_.size() ? times_[i + 1] : horizon_;
    const double w = (t - times_[i]) / (t1 - times_[i]);
    return values_[i] + (ends_[i] - values_[i]) * std::max(0.0, w);
}

double CadlagPath::left_limit(double t) const
{
    if (t <= 0.0)
        return values_.front();
    if (t >= horizon_)
        return ends_.back();
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin()) - 1;
    const double t1 = i + 1 < times_.size() ? times_[i + 1] : horizon_;
    const double w = (t - times_[i]) / (t1 - times_[i]);
    return values_[i] + (ends_[i] - values_[i]) * w;
}

CadlagPath norm_path(const Trajectory& trajectory)
{
    const auto& s = trajectory.samples;
    if (s.size() < 2)
        throw std::invalid_argument("norm_path: trajectory needs at least two samples");
    const double T = s.back().t;
    std::vector<double> times, values, ends;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        times.push_back(s[i].t);
        values.push_back(std::sqrt(s[i].h_sq));
        const auto& b = s[i + 1];
        ends.push_back(std::sqrt(b.jump ? b.left_h_sq : b.h_sq));
    }
    return CadlagPath(T, std::move(times), std::move(values), std::move(ends));
}

double oscillation(const CadlagPath& path, double a, double b)
{
    if (!(b > a))
        return 0.0;
    double lo = path.value(a), hi = lo;
    auto add = [&](double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    };
    const auto bp = path.breakpoints();
    for (std::size_t i = 0; i < bp.size(); ++i)
        if (bp[i] > a && bp[i] < b) {
            add(path.right_value(i));
            add(path.left_limit(bp[i]));
        }
    add(path.left_limit(b));
    return hi - lo;
}

double skorokhod_modulus(const CadlagPath& path, double delta)
{
    const double T = path.horizon();
    if (!(delta > 0.0))
        throw std::invalid_argument("skorokhod_modulus: delta must be positive");
    if (delta >= T)
        return oscillation(path, 0.0, T);

    const double tol = 1e-12 * T;
    const auto bp = path.breakpoints();
    const std::size_t P = bp.size();
    std::vector<double> lo(P), hi(P), end(P);
    bool steps = true;
    for (std::size_t p = 0; p < P; ++p) {
        const double a = path.right_value(p), b = path.left_limit(p + 1 < P ? bp[p + 1] : T);
        lo[p] = std::min(a, b);
        hi[p] = std::max(a, b);
        end[p] = p + 1 < P ? bp[p + 1] : T;
        steps = steps && a == b;
    }

    // Is there a partition with mesh >= delta whose intervals all oscillate
    // by at most w, counting every piece an interval touches in full? Only
    // the earliest reachable point inside each piece matters: all points of
    // a piece can extend to the same limit, and the earliest one gets there
    // with the most room.
    std::vector<double> first(P);
    auto feasible = [&](double w) {
        for (std::size_t p = 0; p < P; ++p)
            if (hi[p] - lo[p] > w)
                return false;
        std::fill(first.begin(), first.end(), inf);
        first[0] = 0.0;
        for (std::size_t p = 0; p < P; ++p) {
            if (first[p] == inf)
                continue;
            std::size_t j = p;
            double l = lo[p], h = hi[p];
            while (j + 1 < P && std::max(h, hi[j + 1]) - std::min(l, lo[j + 1]) <= w) {
                ++j;
                l = std::min(l, lo[j]);
                h = std::max(h, hi[j]);
            }
            const double reach = end[j]; // the next interval may start anywhere up to here
            const double a = first[p] + delta;
            if (a > reach + tol)
                continue;
            if (j + 1 == P)
                return true;
            for (std::size_t q = p + 1; q <= j + 1; ++q) {
                if (a >= end[q] - tol)
                    continue;
                first[q] = std::min(first[q], a <= bp[q] + tol ? bp[q] : a);
            }
        }
        return false;
    };

    // The answer is one of the finitely many range widths, and feasible()
    // evaluates widths with the same arithmetic, so bisecting on the bit
    // pattern of non-negative doubles lands on it exactly.
    double piece_bound;
    if (feasible(0.0)) {
        piece_bound = 0.0;
    } else {
        auto bits = [](double x) {
            std::uint64_t u;
            std::memcpy(&u, &x, sizeof u);
            return u;
        };
        auto from_bits = [](std::uint64_t u) {
            double x;
            std::memcpy(&x, &u, sizeof x);
            return x;
        };
        std::uint64_t lo_bits = 0;
        std::uint64_t hi_bits = bits(*std::max_element(hi.begin(), hi.end()) - *std::min_element(lo.begin(), lo.end()));
        while (hi_bits - lo_bits > 1) {
            const std::uint64_t mid = lo_bits + (hi_bits - lo_bits) / 2;
            (feasible(from_bits(mid)) ? hi_bits : lo_bits) = mid;
        }
        piece_bound = from_bits(hi_bits);
    }
    if (steps)
        return piece_bound;

    // Sloped pieces: whole-piece ranges overcount, so also try partitions
    // through the breakpoints closed under +delta and keep the smaller bound.
    std::vector<double> points(bp.begin(), bp.end());
    std::vector<double> frontier = points;
    while (!frontier.empty() && points.size() < max_modulus_candidates) {
        std::vector<double> next;
        for (double p : frontier)
            if (p + delta < T - tol)
                next.push_back(p + delta);
        points.insert(points.end(), next.begin(), next.end());
        std::sort(points.begin(), points.end());
        points.erase(std::unique(points.begin(), points.end(), [&](double x, double y) { return y - x <= tol; }),
                     points.end());
        frontier = std::move(next);
    }
    points.push_back(T);

    const std::size_t m = points.size();
    std::vector<double> best(m, inf);
    best[0] = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        if (best[i] == inf)
            continue;
        for (std::size_t j = i + 1; j < m; ++j) {
            if (points[j] - points[i] < delta - tol)
                continue;
            const double w = std::max(best[i], oscillation(path, points[i], points[j]));
            best[j] = std::min(best[j], w);
        }
    }
    return std::min(piece_bound, best[m - 1]);
}

double skorokhod_candidate_cost(const CadlagPath& u, const CadlagPath& v, const TimeChange& lambda)
{
    check_same_horizon(u, v);
    const TimeChange knots = normalized(u, lambda);
    double sup_diff = 0.0, sup_shift = 0.0, sup_log = 0.0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        const auto [a0, b0] = knots[i];
        const auto [a1, b1] = knots[i + 1];
        sup_diff = std::max(sup_diff, segment_sup(u, v, a0, a1, b0, b1));
        sup_shift = std::max(sup_shift, std::abs(a1 - b1));
        sup_log = std::max(sup_log, std::abs(std::log((b1 - b0) / (a1 - a0))));
    }
    return sup_diff + sup_shift + sup_log;
}

double skorokhod_distance(const CadlagPath& u, const CadlagPath& v, std::span<const TimeChange> candidates)
{
    check_same_horizon(u, v);
    const double T = u.horizon();
    double best = skorokhod_candidate_cost(u, v, {});
    if (best == 0.0)
        return 0.0;

    // Knots at the breakpoints of u; images drawn from x itself and nearby
    // breakpoints of v. A move further than the current best cannot help.
    std::vector<double> knots(u.breakpoints().begin(), u.breakpoints().end());
    knots.push_back(T);
    const std::size_t p = knots.size();
    std::vector<std::vector<double>> images(p);
    images.front() = {0.0};
    images.back() = {T};
    for (std::size_t i = 1; i + 1 < p; ++i) {
        std::vector<double> c{knots[i]};
        for (double s : v.breakpoints())
            if (s > 0.0 && std::abs(s - knots[i]) < best)
                c.push_back(s);
        std::sort(c.begin(), c.end(), [&](double a, double b) {
            return std::abs(a - knots[i]) < std::abs(b - knots[i]);
        });
        if (c.size() > max_images)
            c.resize(max_images);
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
        images[i] = std::move(c);
    }

    // Segment costs between consecutive knots for every pair of images.
    struct Seg {
        double sup = inf;
        double log = inf;
    };
    std::vector<std::vector<std::vector<Seg>>> seg(p - 1);
    std::vector<double> shifts, logs;
    for (std::size_t i = 0; i + 1 < p; ++i) {
        seg[i].assign(images[i].size(), std::vector<Seg>(images[i + 1].size()));
        for (std::size_t a = 0; a < images[i].size(); ++a) {
            shifts.push_back(std::abs(images[i][a] - knots[i]));
            for (std::size_t b = 0; b < images[i + 1].size(); ++b) {
                const double b0 = images[i][a], b1 = images[i + 1][b];
                if (!(b1 > b0))
                    continue;
                Seg& s = seg[i][a][b];
                s.sup = segment_sup(u, v, knots[i], knots[i + 1], b0, b1);
                s.log = std::abs(std::log((b1 - b0) / (knots[i + 1] - knots[i])));
                logs.push_back(s.log);
            }
        }
    }

    const auto shift_levels = thin_thresholds(shifts);
    const auto log_levels = thin_thresholds(logs);
    for (double dmax : shift_levels) {
        for (double lmax : log_levels) {
            if (dmax + lmax >= best)
                continue;
            // Bottleneck dynamic program on sup|u - v o lambda| under both caps.
            std::vector<double> cost(images[0].size(), 0.0);
            std::vector<std::vector<std::size_t>> parent(p);
            for (std::size_t i = 0; i + 1 < p; ++i) {
                std::vector<double> next(images[i + 1].size(), inf);
                parent[i + 1].assign(images[i + 1].size(), 0);
                for (std::size_t b = 0; b < images[i + 1].size(); ++b) {
                    if (std::abs(images[i + 1][b] - knots[i + 1]) > dmax)
                        continue;
                    for (std::size_t a = 0; a < images[i].size(); ++a) {
                        const Seg& s = seg[i][a][b];
                        if (cost[a] == inf || s.log > lmax)
                            continue;
                        const double c = std::max(cost[a], s.sup);
                        if (c < next[b]) {
                            next[b] = c;
                            parent[i + 1][b] = a;
                        }
                    }
                }
                cost = std::move(next);
            }
            if (cost[0] == inf || cost[0] + dmax + lmax >= best)
                continue;
            TimeChange lambda(p);
            std::size_t b = 0;
            for (std::size_t i = p; i-- > 0;) {
                lambda[i] = {knots[i], images[i][b]};
                if (i > 0)
                    b = parent[i][b];
            }
            best = std::min(best, skorokhod_candidate_cost(u, v, lambda));
        }
    }

    for (const auto& lambda : candidates)
        best = std::min(best, skorokhod_candidate_cost(u, v, lambda));
    return best;
}

} // namespace hallspde
