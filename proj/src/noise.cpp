#include "hallspde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace hallspde {
namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void check_mark(const NoiseCoefficient& coefficient, std::size_t mark)
{
    const bool known = coefficient.kind == NoiseKind::user ? true : mark < coefficient.amplitude.size();
    if (!known)
        throw std::out_of_range("eval_F: unknown mark " + std::to_string(mark));
}

} // namespace

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t trajectory, Substream stream)
{
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ trajectory);
    return splitmix64(h ^ static_cast<std::uint64_t>(stream));
}

MarkSpace::MarkSpace(std::vector<Mark> marks) : marks_(std::move(marks))
{
    for (const auto& m : marks_)
        if (!(m.weight >= 0.0) || !std::isfinite(m.weight))
            throw std::invalid_argument("mark space: weight of mark '" + m.id + "' must be finite and >= 0");
    for (std::size_t i = 0; i < marks_.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (marks_[i].id == marks_[j].id)
                throw std::invalid_argument("mark space: duplicate mark id '" + marks_[i].id + "'");
}

double MarkSpace::total_mass() const
{
    double sum = 0.0;
    for (const auto& m : marks_)
        sum += m.weight;
    return sum;
}

double MarkSpace::mass_of(std::span<const std::size_t> subset) const
{
    double sum = 0.0;
    for (auto i : subset)
        sum += marks_.at(i).weight;
    return sum;
}

std::size_t JumpStream::count(double t, std::span<const std::size_t> subset) const
{
    return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [&](const JumpEvent& e) {
        return e.time <= t && std::find(subset.begin(), subset.end(), e.mark) != subset.end();
    }));
}

std::size_t JumpStream::count(double t) const
{
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [&](const JumpEvent& e) { return e.time <= t; }));
}

JumpStream sample_jump_stream(const MarkSpace& marks, double horizon, Rng& rng)
{
    if (!(horizon > 0.0))
        throw std::invalid_argument("sample_jump_stream: horizon must be positive");
    JumpStream stream{horizon, {}};
    const double mass = marks.total_mass();
    if (mass == 0.0)
        return stream;

    std::poisson_distribution<long> count_dist(horizon * mass);
    const long count = count_dist(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> weights;
    for (const auto& m : marks.marks())
        weights.push_back(m.weight);
    std::discrete_distribution<std::size_t> mark_dist(weights.begin(), weights.end());

    stream.events.reserve(count);
    for (long i = 0; i < count; ++i) {
        const double t = horizon * (1.0 - unit(rng));  // (0, T]
        stream.events.push_back({t, mark_dist(rng)});
    }
    std::sort(stream.events.begin(), stream.events.end(),
              [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
    // Coincident draws are a probability-zero event; keep times strictly increasing.
    for (std::size_t i = 1; i < stream.events.size(); ++i)
        if (stream.events[i].time <= stream.events[i - 1].time)
            stream.events[i].time = std::nextafter(stream.events[i - 1].time, horizon + 1.0);
    return stream;
}

void write_jump_csv(std::ostream& out, const JumpStream& stream, const MarkSpace& marks)
{
    out << "time,mark_id\n";
    out.precision(17);
    for (const auto& e : stream.events)
        out << e.time << ',' << marks[e.mark].id << '\n';
}

std::vector<std::pair<double, double>> time_quadrature(double horizon, std::span<const double> breaks)
{
    static constexpr std::array<double, 5> nodes{-0.9061798459386640, -0.5384693101056831, 0.0,
                                                 0.5384693101056831, 0.9061798459386640};
    static constexpr std::array<double, 5> weights{0.2369268850561891, 0.4786286704993665,
                                                   0.5688888888888889, 0.4786286704993665,
                                                   0.2369268850561891};
    constexpr int panels = 32;
    std::vector<double> cuts;
    for (int p = 0; p <= panels; ++p)
        cuts.push_back(horizon * p / panels);
    for (double b : breaks)
        if (b > 0.0 && b < horizon)
            cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<std::pair<double, double>> rule;
    rule.reserve(5 * (cuts.size() - 1));
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double mid = 0.5 * (cuts[p] + cuts[p + 1]);
        const double half = 0.5 * (cuts[p + 1] - cuts[p]);
        for (std::size_t q = 0; q < nodes.size(); ++q)
            rule.emplace_back(mid + half * nodes[q], half * weights[q]);
    }
    return rule;
}

NoiseCoefficient NoiseCoefficient::zero(const WaveGrid& grid, std::size_t marks)
{
    NoiseCoefficient c;
    c.kind = NoiseKind::additive;
    c.scale.assign(marks, 0.0);
    c.amplitude.assign(marks, State(grid));
    return c;
}

State eval_F(const NoiseCoefficient& coefficient, double t, const State& state, std::size_t mark)
{
    check_mark(coefficient, mark);
    State out(state.grid());
    switch (coefficient.kind) {
    case NoiseKind::additive:
        out = coefficient.amplitude[mark];
        break;
    case NoiseKind::linear_multiplicative:
        out = coefficient.scale.at(mark) * state;
        out += coefficient.amplitude[mark];
        break;
    case NoiseKind::user:
        if (!coefficient.user)
            throw std::invalid_argument("eval_F: user coefficient without a callable");
        out = coefficient.user(t, state, mark);
        break;
    }
    out.u = leray_project(out.u);
    out.B = leray_project(out.B);
    return out;
}

State compensator(const NoiseCoefficient& coefficient, const MarkSpace& marks, double t, const State& state)
{
    State sum(state.grid());
    for (std::size_t y = 0; y < marks.size(); ++y)
        if (marks[y].weight != 0.0)
            sum.axpy(marks[y].weight, eval_F(coefficient, t, state, y));
    return sum;
}

AuditResult audit_lipschitz(const NoiseCoefficient& coefficient, const MarkSpace& marks, double t, const State& a,
                            const State& b)
{
    AuditResult r;
    for (std::size_t y = 0; y < marks.size(); ++y) {
        const State diff = eval_F(coefficient, t, a, y) - eval_F(coefficient, t, b, y);
        r.lhs += marks[y].weight * inner_h(diff, diff);
    }
    const State d = a - b;
    r.rhs = coefficient.lipschitz * inner_h(d, d);
    return r;
}

AuditResult audit_growth(const NoiseCoefficient& coefficient, const MarkSpace& marks, double t, const State& a, int q)
{
    const auto it = coefficient.growth.find(q);
    if (it == coefficient.growth.end())
        throw std::invalid_argument("audit_growth: no declared K_q for q = " + std::to_string(q));
    AuditResult r;
    for (std::size_t y = 0; y < marks.size(); ++y)
        r.lhs += marks[y].weight * std::pow(h_norm(eval_F(coefficient, t, a, y)), q);
    r.rhs = it->second * (1.0 + std::pow(h_norm(a), q));
    return r;
}

std::vector<double> sample_wiener_increment(const WienerDriver& driver, double dt, Rng& rng)
{
    if (dt < 0.0 || !std::isfinite(dt))
        throw std::invalid_argument("sample_wiener_increment: dt must be non-negative");
    std::vector<double> dw(driver.dimension, 0.0);
    if (dt == 0.0)
        return dw;
    std::normal_distribution<double> normal(0.0, std::sqrt(dt));
    for (auto& w : dw)
        w = normal(rng);
    return dw;
}

std::vector<State> eval_G(const WienerDriver& driver, double t, const State& state)
{
    std::vector<State> out;
    out.reserve(driver.dimension);
    for (std::size_t j = 0; j < driver.dimension; ++j) {
        switch (driver.kind) {
        case WienerDriver::Kind::zero:
            out.emplace_back(state.grid());
            break;
        case WienerDriver::Kind::additive:
            out.push_back(driver.columns.at(j));
            break;
        case WienerDriver::Kind::linear: {
            State col = driver.sigma.at(j) * state;
            col += driver.columns.at(j);
            out.push_back(std::move(col));
            break;
        }
        case WienerDriver::Kind::user:
            break;
        }
    }
    if (driver.kind == WienerDriver::Kind::user) {
        if (!driver.user)
            throw std::invalid_argument("eval_G: user driver without a callable");
        out = driver.user(t, state);
        if (out.size() != driver.dimension)
            throw std::invalid_argument("eval_G: user driver returned the wrong number of columns");
    }
    for (auto& col : out) {
        col.u = leray_project(col.u);
        col.B = leray_project(col.B);
    }
    return out;
}

AuditResult audit_wiener_growth(const WienerDriver& driver, const PhysParams& params, double t, const State& state)
{
    AuditResult r;
    for (const auto& col : eval_G(driver, t, state))
        r.lhs += inner_h(col, col);
    r.rhs = (2.0 - driver.a) * dirichlet_form(state, state, params.nu1, params.nu2) +
            driver.lambda * inner_h(state, state) + driver.rho;
    return r;
}

} // namespace hallspde
