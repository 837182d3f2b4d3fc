#pragma once

#include "hallspde/integrator.hpp"
#include "hallspde/skorokhod.hpp"
#include "hallspde/spectral_space.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace testing {

using namespace hallspde;

inline constexpr double two_pi = 2.0 * std::numbers::pi;

using VectorFn = std::function<std::array<double, 3>(double, double, double)>;

inline PhysicalField sample(const WaveGrid& g, const VectorFn& fn)
{
    const int n = g.resolution();
    const double h = g.box_length() / n;
    PhysicalField p(g);
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l, ++idx) {
                const auto v = fn(i * h, j * h, l * h);
                for (int c = 0; c < 3; ++c)
                    p.component(c)[idx] = v[c];
            }
    return p;
}

inline SpectralField field(const WaveGrid& g, const VectorFn& fn)
{
    return to_spectral(sample(g, fn));
}

inline State random_state(const WaveGrid& g, double level, std::uint64_t seed, double rms = 1.0)
{
    Rng rng(seed);
    return random_solenoidal_state(g, CutoffLevel(level), rng, rms);
}

inline PhysicalField random_physical(const WaveGrid& g, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    PhysicalField p(g);
    for (auto& v : p.values)
        v = normal(rng);
    return p;
}

/// Direct evaluation of N^{-3/2} sum_x f(x) e^{-i k.x}, O(N^6).
inline SpectralField direct_dft(const PhysicalField& p)
{
    const WaveGrid& g = p.grid;
    const int n = g.resolution();
    SpectralField out(g);
    const double norm = std::pow(static_cast<double>(n), -1.5);
    for (std::size_t m = 0; m < g.size(); ++m) {
        const auto k = g.indices(m);
        for (int c = 0; c < 3; ++c) {
            std::complex<double> sum{};
            std::size_t x = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < n; ++l, ++x) {
                        const double phase = -two_pi * (k[0] * i + k[1] * j + k[2] * l) / n;
                        sum += p.component(c)[x] * std::polar(1.0, phase);
                    }
            out.at(c, m) = norm * sum;
        }
    }
    return out;
}

inline double norm(const SpectralField& f)
{
    return std::sqrt(inner_l2(f, f));
}

inline double distance(const SpectralField& a, const SpectralField& b)
{
    return norm(a - b);
}

inline double distance(const State& a, const State& b)
{
    return h_norm(a - b);
}

// Chi-square goodness of fit of integer samples against Poisson(lambda) at level 0.01.
inline bool poisson_fit(const std::vector<std::size_t>& counts, double lambda)
{
    const boost::math::poisson_distribution<double> law(lambda);
    const double n = static_cast<double>(counts.size());
    // Bins 0..k with expected >= 5, the last one absorbing the tail.
    std::vector<double> expected;
    double used = 0.0;
    for (std::size_t k = 0;; ++k) {
        const double p = boost::math::pdf(law, static_cast<double>(k));
        if (n * (1.0 - used - p) < 5.0) {
            expected.push_back(n * (1.0 - used));
            break;
        }
        expected.push_back(n * p);
        used += p;
    }
    std::vector<double> observed(expected.size(), 0.0);
    for (auto c : counts)
        observed[std::min(c, expected.size() - 1)] += 1.0;
    double chi2 = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i)
        chi2 += std::pow(observed[i] - expected[i], 2) / expected[i];
    const boost::math::chi_squared_distribution<double> ref(static_cast<double>(expected.size() - 1));
    return chi2 <= boost::math::quantile(ref, 0.99);
}

/// Step function on [0, T) with one value per uniform cell.
struct GridStep {
    double T;
    std::vector<double> values;

    double h() const { return T / static_cast<double>(values.size()); }
};

inline CadlagPath to_path(const GridStep& s)
{
    std::vector<double> times{0.0}, vals{s.values[0]};
    for (std::size_t i = 1; i < s.values.size(); ++i)
        if (s.values[i] != vals.back()) {
            times.push_back(i * s.h());
            vals.push_back(s.values[i]);
        }
    return CadlagPath::piecewise_constant(s.T, times, vals);
}

/// Exhaustive search over partitions drawn from the cell boundaries (0 and T
/// always present): every subset of the interior points.
inline double brute_modulus(const GridStep& s, int delta_cells)
{
    const int cells = static_cast<int>(s.values.size());
    const int interior = cells - 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t mask = 0; mask < (1u << interior); ++mask) {
        std::vector<int> pts{0};
        for (int i = 0; i < interior; ++i)
            if (mask & (1u << i))
                pts.push_back(i + 1);
        pts.push_back(cells);
        bool ok = true;
        double w = 0.0;
        for (std::size_t j = 0; j + 1 < pts.size() && ok; ++j) {
            if (pts[j + 1] - pts[j] < delta_cells) {
                ok = false;
                break;
            }
            double lo = s.values[pts[j]], hi = lo;
            for (int c = pts[j]; c < pts[j + 1]; ++c) {
                lo = std::min(lo, s.values[c]);
                hi = std::max(hi, s.values[c]);
            }
            w = std::max(w, hi - lo);
        }
        if (ok)
            best = std::min(best, w);
    }
    return best;
}

} // namespace testing
