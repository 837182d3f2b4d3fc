#include "hallspde/diagnostics.hpp"

#include "hallspde/mhd_operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>

namespace hallspde {
namespace {

double sorted_sum(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    return std::accumulate(values.begin(), values.end(), 0.0);
}

void require_nonnegative(double value, const char* name)
{
    if (!(value >= 0.0) || !std::isfinite(value))
        throw std::invalid_argument(std::string("gronwall: ") + name + " must be finite and >= 0");
}

void require_nonnegative(const std::vector<std::vector<double>>& paths, const char* name)
{
    for (const auto& p : paths)
        for (double v : p)
            if (!(v >= 0.0))
                throw std::invalid_argument(std::string("gronwall: process ") + name + " must be >= 0");
}

double trapezoid(std::span<const double> t, std::span<const double> f)
{
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < t.size(); ++i)
        s += 0.5 * (t[i + 1] - t[i]) * (f[i] + f[i + 1]);
    return s;
}

// Ordinary least squares of y on x: (slope, intercept).
std::pair<double, double> least_squares(std::span<const double> x, std::span<const double> y)
{
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

} // namespace

void GronwallInput::validate() const
{
    require_nonnegative(C, "C");
    require_nonnegative(alpha, "alpha");
    require_nonnegative(beta, "beta");
    require_nonnegative(gamma, "gamma");
    require_nonnegative(delta, "delta");
    require_nonnegative(C_tilde, "C_tilde");
    for (double z : Z)
        require_nonnegative(z, "Z");
    const double eC = std::exp(C);
    if (2.0 * beta * eC > 1.0)
        throw std::invalid_argument("gronwall: condition 2 beta e^C <= 1 violated (2 beta e^C = " +
                                    std::to_string(2.0 * beta * eC) + ")");
    if (2.0 * delta * eC > alpha)
        throw std::invalid_argument("gronwall: condition 2 delta e^C <= alpha violated (2 delta e^C = " +
                                    std::to_string(2.0 * delta * eC) + ", alpha = " + std::to_string(alpha) + ")");

    require_nonnegative(X, "X");
    require_nonnegative(Y, "Y");
    require_nonnegative(I, "I");
    require_nonnegative(phi, "phi");
    for (const auto* paths : {&X, &Y, &I, &phi})
        for (const auto& p : *paths)
            if (p.size() != times.size())
                throw std::invalid_argument("gronwall: process length differs from the time grid");
    for (const auto& p : I)
        for (std::size_t i = 1; i < p.size(); ++i)
            if (p[i] < p[i - 1])
                throw std::invalid_argument("gronwall: I must be non-decreasing");
    for (const auto& p : phi)
        if (trapezoid(times, p) > C * (1.0 + 1e-12))
            throw std::invalid_argument("gronwall: condition int phi <= C violated");
}

double gronwall_bound(const GronwallInput& input, double t)
{
    input.validate();
    if (input.Z.empty())
        throw std::invalid_argument("gronwall: no samples of Z");
    const double mean_z = sorted_sum(input.Z) / static_cast<double>(input.Z.size());
    const double eC = std::exp(input.C);
    return 2.0 * std::exp(input.C + 2.0 * t * input.gamma * eC) * (mean_z + input.C_tilde);
}

GronwallCheck check_gronwall(const GronwallInput& input)
{
    if (input.X.empty())
        throw std::invalid_argument("gronwall: no sampled X paths");
    if (!input.Y.empty() && input.Y.size() != input.X.size())
        throw std::invalid_argument("gronwall: X and Y have different sample counts");
    GronwallCheck check;
    for (std::size_t k = 0; k < input.times.size(); ++k) {
        std::vector<double> lhs;
        for (std::size_t m = 0; m < input.X.size(); ++m)
            lhs.push_back(input.X[m][k] + (input.Y.empty() ? 0.0 : input.alpha * input.Y[m][k]));
        const double mean = sorted_sum(lhs) / static_cast<double>(lhs.size());
        const double bound = gronwall_bound(input, input.times[k]);
        const double ratio = bound > 0.0 ? mean / bound : (mean > 0.0 ? INFINITY : 0.0);
        check.worst_ratio = std::max(check.worst_ratio, ratio);
        if (mean > bound)
            check.holds = false;
    }
    return check;
}

std::pair<double, double> mean_and_stderr(std::vector<double> values)
{
    if (values.empty())
        return {0.0, 0.0};
    const double n = static_cast<double>(values.size());
    const double mean = sorted_sum(values) / n;
    if (values.size() < 2)
        return {mean, 0.0};
    for (auto& v : values)
        v = (v - mean) * (v - mean);
    const double var = sorted_sum(std::move(values)) / (n - 1.0);
    return {mean, std::sqrt(var / n)};
}

MomentSample moment_sample(const Trajectory& trajectory, std::span<const int> orders)
{
    const auto& s = trajectory.samples;
    MomentSample out;
    out.guard_hit = trajectory.guard_hit;
    for (int q : orders) {
        double sup = 0.0;
        for (const auto& smp : s) {
            sup = std::max(sup, std::pow(smp.h_sq, 0.5 * q));
            if (smp.jump)
                sup = std::max(sup, std::pow(smp.left_h_sq, 0.5 * q));
        }
        auto weight = [q](double h_sq, double d_sq) { return std::pow(h_sq, 0.5 * (q - 2)) * d_sq; };
        double integral = 0.0;
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            const auto& b = s[i + 1];
            const double right = b.jump ? weight(b.left_h_sq, b.left_dirichlet_sq) : weight(b.h_sq, b.dirichlet_sq);
            integral += 0.5 * (b.t - s[i].t) * (weight(s[i].h_sq, s[i].dirichlet_sq) + right);
        }
        out.sup_power[q] = sup;
        out.weighted_dissipation[q] = integral;
    }
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const auto& b = s[i + 1];
        const double right = b.jump ? b.left_h_sq + b.left_dirichlet_sq : b.h_sq + b.dirichlet_sq;
        out.v_integral += 0.5 * (b.t - s[i].t) * (s[i].h_sq + s[i].dirichlet_sq + right);
    }
    return out;
}

const MomentEstimate& MomentReport::at(int q) const
{
    for (const auto& e : estimates)
        if (e.q == q)
            return e;
    throw std::out_of_range("moment report: no estimate for q = " + std::to_string(q));
}

MomentReport moment_report(std::span<const MomentSample> samples, std::span<const int> orders, double guard_radius,
                           double level)
{
    if (samples.empty())
        throw std::invalid_argument("moment_report: empty ensemble");
    MomentReport report;
    report.level = level;
    report.ensemble_size = samples.size();
    report.guard_radius = guard_radius;
    for (const auto& s : samples)
        report.guard_hits += s.guard_hit ? 1 : 0;
    for (int q : orders) {
        std::vector<double> sup, diss;
        for (const auto& s : samples) {
            sup.push_back(s.sup_power.at(q));
            diss.push_back(s.weighted_dissipation.at(q));
        }
        MomentEstimate e;
        e.q = q;
        std::tie(e.sup_mean, e.sup_stderr) = mean_and_stderr(std::move(sup));
        std::tie(e.dissipation_mean, e.dissipation_stderr) = mean_and_stderr(std::move(diss));
        report.estimates.push_back(e);
    }
    std::vector<double> v;
    for (const auto& s : samples)
        v.push_back(s.v_integral);
    std::tie(report.v_integral_mean, report.v_integral_stderr) = mean_and_stderr(std::move(v));
    return report;
}

MomentReport moment_report(std::span<const Trajectory> ensemble, std::span<const int> orders, double guard_radius,
                           double level)
{
    std::vector<MomentSample> samples;
    samples.reserve(ensemble.size());
    for (const auto& t : ensemble)
        samples.push_back(moment_sample(t, orders));
    return moment_report(samples, orders, guard_radius, level);
}

std::pair<double, double> taylor_check(const State& x, const State& h, int q, double c_q)
{
    if (q < 2)
        throw std::invalid_argument("taylor_check: q must be >= 2");
    const double nx = h_norm(x);
    const double nh = h_norm(h);
    const double nxh = h_norm(x + h);
    const double dq = static_cast<double>(q);
    const double lhs =
        std::abs(std::pow(nxh, dq) - std::pow(nx, dq) - dq * std::pow(nx, dq - 2.0) * inner_h(x, h));
    const double rhs = c_q * (std::pow(nx, dq - 2.0) + std::pow(nh, dq - 2.0)) * nh * nh;
    return {lhs, rhs};
}

double frozen_taylor_constant(int q)
{
    switch (q) {
    case 2:
        return 0.5;
    case 4:
        return 6.71;
    default:
        throw std::invalid_argument("taylor constant: only q = 2 and q = 4 are fitted");
    }
}

std::vector<double> aldous_increments(const Trajectory& trajectory, const AldousOptions& options, double horizon)
{
    if (!trajectory.has_states())
        throw std::invalid_argument("aldous: trajectory states were not kept");
    if (options.thetas.empty())
        throw std::invalid_argument("aldous: empty theta grid");
    const double theta_max = *std::max_element(options.thetas.begin(), options.thetas.end());
    const double tau_default = options.tau > 0.0 ? options.tau : 0.5 * horizon;
    double tau = tau_default;
    if (options.rule == StoppingRule::first_hitting) {
        // Hitting time capped by T - theta_max, itself a stopping time.
        tau = horizon - theta_max;
        for (const auto& s : trajectory.samples)
            if (std::sqrt(s.h_sq) >= options.threshold) {
                tau = std::min(tau, s.t);
                break;
            }
    }
    const double tol = 1e-12 * std::max(1.0, horizon);
    for (double theta : options.thetas)
        if (!(theta > 0.0) || tau + theta > horizon + tol)
            throw std::invalid_argument("aldous: theta = " + std::to_string(theta) +
                                        " outside (0, T - tau]");

    const State& base = trajectory.state_at(tau);
    std::vector<double> out;
    out.reserve(options.thetas.size());
    for (double theta : options.thetas) {
        const State diff = trajectory.state_at(tau + theta) - base;
        out.push_back(std::pow(dual_norm(diff, -options.sobolev), options.exponent));
    }
    return out;
}

AldousReport aldous_fit(std::span<const std::vector<double>> increments, const AldousOptions& options)
{
    const std::size_t k = options.thetas.size();
    if (k < 3)
        throw std::invalid_argument("aldous_fit: at least 3 theta values are required");
    if (increments.empty())
        throw std::invalid_argument("aldous_fit: empty ensemble");
    for (const auto& row : increments)
        if (row.size() != k)
            throw std::invalid_argument("aldous_fit: increment rows do not match the theta grid");

    AldousReport report;
    report.thetas = options.thetas;
    std::vector<double> logt;
    for (double theta : options.thetas)
        logt.push_back(std::log(theta));

    auto means_of = [&](auto&& pick) {
        std::vector<double> means(k);
        for (std::size_t j = 0; j < k; ++j) {
            std::vector<double> col;
            for (std::size_t m = 0; m < increments.size(); ++m)
                col.push_back(increments[pick(m)][j]);
            means[j] = sorted_sum(std::move(col)) / static_cast<double>(increments.size());
        }
        return means;
    };
    report.means = means_of([](std::size_t m) { return m; });

    auto fit = [&](const std::vector<double>& means) -> std::optional<std::pair<double, double>> {
        std::vector<double> logm;
        for (double v : means) {
            if (!(v > 0.0) || !std::isfinite(v))
                return std::nullopt;
            logm.push_back(std::log(v));
        }
        return least_squares(logt, logm);
    };

    const auto main = fit(report.means);
    if (!main) {
        report.degenerate = true;
        report.slope = report.intercept = report.ci_low = report.ci_high = std::nan("");
        report.constant = 0.0;
        return report;
    }
    std::tie(report.slope, report.intercept) = *main;
    report.constant = std::exp(report.intercept);

    // Percentile bootstrap over trajectories, fixed seed so reports are reproducible.
    constexpr int resamples = 400;
    std::mt19937_64 rng(0x5eed);
    std::uniform_int_distribution<std::size_t> pick(0, increments.size() - 1);
    std::vector<double> slopes;
    for (int b = 0; b < resamples; ++b) {
        std::vector<std::size_t> idx(increments.size());
        for (auto& i : idx)
            i = pick(rng);
        if (const auto f = fit(means_of([&](std::size_t m) { return idx[m]; })))
            slopes.push_back(f->first);
    }
    if (slopes.empty()) {
        report.ci_low = report.ci_high = report.slope;
    } else {
        std::sort(slopes.begin(), slopes.end());
        auto quantile = [&](double p) {
            const auto i = static_cast<std::size_t>(std::floor(p * static_cast<double>(slopes.size() - 1)));
            return slopes[i];
        };
        report.ci_low = quantile(0.025);
        report.ci_high = quantile(0.975);
    }
    return report;
}

AldousReport aldous_fit(std::span<const Trajectory> ensemble, const AldousOptions& options, double horizon)
{
    if (options.thetas.size() < 3)
        throw std::invalid_argument("aldous_fit: at least 3 theta values are required");
    std::vector<std::vector<double>> rows;
    rows.reserve(ensemble.size());
    for (const auto& t : ensemble)
        rows.push_back(aldous_increments(t, options, horizon));
    return aldous_fit(rows, options);
}

} // namespace hallspde
