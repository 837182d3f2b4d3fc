#include "hallspde/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>

namespace hallspde {
namespace {

using FieldFn = std::function<std::array<double, 3>(double, double, double)>;

SpectralField sample_field(const WaveGrid& g, const FieldFn& fn)
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
    return to_spectral(p);
}

FieldFn abc_shape(double kappa, double amplitude)
{
    return [=](double x, double y, double z) -> std::array<double, 3> {
        return {amplitude * (std::sin(kappa * z) + std::cos(kappa * y)),
                amplitude * (std::sin(kappa * x) + std::cos(kappa * z)),
                amplitude * (std::sin(kappa * y) + std::cos(kappa * x))};
    };
}

FieldFn taylor_green_shape(double kappa, double amplitude)
{
    return [=](double x, double y, double z) -> std::array<double, 3> {
        return {amplitude * std::sin(kappa * x) * std::cos(kappa * y) * std::cos(kappa * z),
                -amplitude * std::cos(kappa * x) * std::sin(kappa * y) * std::cos(kappa * z), 0.0};
    };
}

FieldFn single_mode_shape(const WaveGrid& g, const InitialCondition& ic, double amplitude)
{
    const double kappa = g.unit();
    const std::array<double, 3> k{kappa * ic.mode[0], kappa * ic.mode[1], kappa * ic.mode[2]};
    const auto p = ic.polarization;
    return [=](double x, double y, double z) -> std::array<double, 3> {
        const double c = amplitude * std::cos(k[0] * x + k[1] * y + k[2] * z);
        return {c * p[0], c * p[1], c * p[2]};
    };
}

// Random-phase solenoidal field supported on integer |k| <= max_mode, scaled
// to physical RMS `rms`.
SpectralField random_field(const WaveGrid& g, int max_mode, double rms, Rng& rng)
{
    SpectralField f(g);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t m = 0; m < g.size(); ++m) {
        const auto w = g.integer_wavevector(m);
        const int k2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
        const double amp = (k2 == 0 || k2 > max_mode * max_mode) ? 0.0 : 1.0 / (1.0 + k2);
        for (int c = 0; c < 3; ++c) {
            const double re = normal(rng), im = normal(rng);
            f.at(c, m) = amp * Complex(re, im);
        }
    }
    // Hermitian part only: real field = (f + conj(f(-k))) / 2.
    SpectralField h(g);
    const int n = g.resolution();
    for (std::size_t m = 0; m < g.size(); ++m) {
        const auto w = g.integer_wavevector(m);
        auto neg = [n](int k) { return ((-k) % n + n) % n; };
        const std::size_t mirror = g.flat(neg(w[0]), neg(w[1]), neg(w[2]));
        for (int c = 0; c < 3; ++c)
            h.at(c, m) = 0.5 * (f.at(c, m) + std::conj(f.at(c, mirror)));
    }
    h = leray_project(h);
    const double norm = std::sqrt(inner_l2(h, h) / static_cast<double>(g.size()));
    if (norm > 0.0)
        h *= rms / norm;
    return h;
}

struct Stepper {
    const SimConfig& config;
    CutoffLevel level;
    State forcing;
    bool has_noise;
    bool has_wiener;
    Rng wiener_rng;
    double max_cfl = 0.0;

    State advance(const State& x, double t, double h)
    {
        State drift(x.grid());
        if (config.nonlinear) {
            NonlinearTerms nl = nonlinear_riesz(x, config.params, level);
            drift -= nl.mhd;
            drift -= nl.hall;
            max_cfl = std::max(max_cfl, h * level.radius() * nl.max_speed);
        }
        if (has_noise)
            drift -= project_state(compensator(config.noise, config.marks, t, x), level);
        if (config.forcing.kind != Forcing::Kind::none)
            drift += forcing;

        State y = x;
        y.axpy(h, drift);
        if (has_wiener) {
            const auto dw = sample_wiener_increment(config.wiener, h, wiener_rng);
            const auto cols = eval_G(config.wiener, t, x);
            for (std::size_t j = 0; j < cols.size(); ++j)
                y.axpy(dw[j], project_state(cols[j], level));
        }
        return project_solenoidal(stokes_propagate(y, config.params, h), level);
    }
};

} // namespace

void SimConfig::validate() const
{
    params.validate();
    if (!(horizon > 0.0))
        throw std::invalid_argument("T: horizon must be positive");
    if (!(dt > 0.0) || dt > horizon)
        throw std::invalid_argument("dt: time step must satisfy 0 < dt <= T");
    if (!(cutoff > 0.0))
        throw std::invalid_argument("cutoff: level n must be positive");
    if (cutoff > grid.max_cutoff() * (1.0 + 1e-12))
        throw std::invalid_argument("cutoff: level n = " + std::to_string(cutoff) + " exceeds N/2 * 2pi/L = " +
                                    std::to_string(grid.max_cutoff()));
    if (ensemble_size == 0)
        throw std::invalid_argument("ensemble: size must be at least 1");
    if (noise.kind != NoiseKind::user && noise.amplitude.size() != marks.size())
        throw std::invalid_argument("noise: coefficient must define one amplitude per mark");
    if (noise.kind == NoiseKind::linear_multiplicative && noise.scale.size() != marks.size())
        throw std::invalid_argument("noise: coefficient must define one scale per mark");
    for (const auto& a : noise.amplitude)
        if (!(a.grid() == grid))
            throw std::invalid_argument("noise: amplitude grid differs from the run grid");
    for (int q : moment_orders)
        if (q < 2)
            throw std::invalid_argument("q: moment orders must be >= 2");
    if (guard_radius < 0.0)
        throw std::invalid_argument("guard_radius: must be non-negative");
}

const State& Trajectory::state_at(double t) const
{
    if (states.empty())
        throw std::logic_error("trajectory: states were not kept");
    const double tol = 1e-12 * std::max(1.0, std::abs(t));
    auto it = std::upper_bound(samples.begin(), samples.end(), t + tol,
                               [](double v, const Sample& s) { return v < s.t; });
    const std::size_t idx = it == samples.begin() ? 0 : static_cast<std::size_t>(it - samples.begin()) - 1;
    return states.at(std::min(idx, states.size() - 1));
}

State initial_state(const SimConfig& config)
{
    const WaveGrid& g = config.grid;
    const InitialCondition& ic = config.initial;
    const double kappa = g.unit();
    State x(g);
    switch (ic.kind) {
    case InitialCondition::Kind::zero:
        break;
    case InitialCondition::Kind::abc:
        x = State(sample_field(g, abc_shape(kappa, ic.amplitude_u)), sample_field(g, abc_shape(kappa, ic.amplitude_B)));
        break;
    case InitialCondition::Kind::taylor_green:
        x = State(sample_field(g, taylor_green_shape(kappa, ic.amplitude_u)),
                  sample_field(g, abc_shape(kappa, ic.amplitude_B)));
        break;
    case InitialCondition::Kind::single_mode:
        x = State(sample_field(g, single_mode_shape(g, ic, ic.amplitude_u)),
                  sample_field(g, single_mode_shape(g, ic, ic.amplitude_B)));
        break;
    case InitialCondition::Kind::random: {
        Rng rng(trajectory_seed(config.seed, 0, Substream::initial));
        SpectralField u = random_field(g, ic.max_mode, ic.amplitude_u, rng);
        SpectralField b = random_field(g, ic.max_mode, ic.amplitude_B, rng);
        x = State(std::move(u), std::move(b));
        break;
    }
    }
    return project_solenoidal(x, config.level());
}

State random_solenoidal_state(const WaveGrid& grid, CutoffLevel level, Rng& rng, double rms)
{
    const int max_mode = static_cast<int>(std::floor(level.radius() / grid.unit() * (1.0 + 1e-12)));
    SpectralField u = random_field(grid, std::max(max_mode, 1), rms, rng);
    SpectralField b = random_field(grid, std::max(max_mode, 1), rms, rng);
    State x = project_solenoidal(State(std::move(u), std::move(b)), level);
    // The cutoff may have removed energy; restore the requested RMS.
    const double scale = static_cast<double>(grid.size());
    const double nu = std::sqrt(inner_l2(x.u, x.u) / scale), nb = std::sqrt(inner_l2(x.B, x.B) / scale);
    if (nu > 0.0)
        x.u *= rms / nu;
    if (nb > 0.0)
        x.B *= rms / nb;
    return x;
}

State forcing_state(const SimConfig& config)
{
    const WaveGrid& g = config.grid;
    if (config.forcing.kind == Forcing::Kind::none)
        return State(g);
    State f(sample_field(g, abc_shape(g.unit(), config.forcing.amplitude_u)),
            sample_field(g, abc_shape(g.unit(), config.forcing.amplitude_B)));
    return project_solenoidal(f, config.level());
}

std::array<double, 3> energy_of(const State& state, const PhysParams& params)
{
    const double h = inner_h(state, state);
    const double d = dirichlet_form(state, state, params.nu1, params.nu2);
    return {h, d, h + d};
}

Trajectory simulate(const SimConfig& config, std::size_t trajectory_index, const SimOptions& options)
{
    config.validate();
    const CutoffLevel level = config.level();

    Trajectory traj;
    traj.index = trajectory_index;

    Rng jump_rng(trajectory_seed(config.seed, trajectory_index, Substream::jumps));
    traj.stream = sample_jump_stream(config.marks, config.horizon, jump_rng);

    Stepper stepper{config,
                    level,
                    forcing_state(config),
                    config.marks.total_mass() > 0.0,
                    config.wiener.kind != WienerDriver::Kind::zero && config.wiener.dimension > 0,
                    Rng(trajectory_seed(config.seed, trajectory_index, Substream::wiener))};

    State x = initial_state(config);
    const double x0_norm = h_norm(x);
    traj.guard_radius = config.guard_radius > 0.0 ? config.guard_radius : 1e6 * std::max(x0_norm, 1.0);

    auto record = [&](double t, const State& s, const State* left) {
        const auto e = energy_of(s, config.params);
        Sample smp{t, e[0], e[1], left != nullptr, e[0], e[1]};
        if (left) {
            const auto el = energy_of(*left, config.params);
            smp.left_h_sq = el[0];
            smp.left_dirichlet_sq = el[1];
        }
        traj.samples.push_back(smp);
        if (options.keep_states)
            traj.states.push_back(s);
        if (!s.is_finite() || std::sqrt(e[0]) > traj.guard_radius) {
            traj.guard_hit = true;
            traj.guard_time = t;
        }
    };
    record(0.0, x, nullptr);

    const auto steps = static_cast<std::size_t>(std::ceil(config.horizon / config.dt - 1e-9));
    const auto& events = traj.stream.events;
    std::size_t next_event = 0;

    for (std::size_t k = 0; k < steps && !traj.guard_hit; ++k) {
        const double t0 = k * config.dt;
        const double t1 = (k + 1 == steps) ? config.horizon : (k + 1) * config.dt;
        double a = t0;
        while (!traj.guard_hit) {
            const bool jump = next_event < events.size() && events[next_event].time <= t1;
            const double b = jump ? events[next_event].time : t1;
            if (b > a)
                x = stepper.advance(x, a, b - a);
            if (!jump) {
                record(t1, x, nullptr);
                break;
            }
            const JumpEvent& ev = events[next_event++];
            State increment = project_state(eval_F(config.noise, ev.time, x, ev.mark), level);
            State left = x;
            x += increment;
            JumpRecord rec{traj.samples.size(), ev.mark, ev.time, std::nullopt, std::nullopt};
            if (options.keep_states) {
                rec.left = left;
                rec.increment = std::move(increment);
            }
            traj.jumps.push_back(std::move(rec));
            record(ev.time, x, &left);
            a = ev.time;
            if (a >= t1)
                break;
        }
    }
    traj.max_cfl = stepper.max_cfl;
    return traj;
}

std::vector<Trajectory> run_ensemble(const SimConfig& config, unsigned jobs, const SimOptions& options)
{
    return run_ensemble_reduce(config, jobs, options, [](Trajectory&& t) { return std::move(t); });
}

std::vector<EnergyRow> energy_series(const Trajectory& trajectory)
{
    std::vector<EnergyRow> rows;
    rows.reserve(trajectory.samples.size());
    for (const auto& s : trajectory.samples)
        rows.push_back({s.t, s.h_sq, s.dirichlet_sq, s.h_sq + s.dirichlet_sq, s.jump});
    return rows;
}

void write_energy_csv(std::ostream& out, std::span<const EnergyRow> rows)
{
    out << "t,H_norm_sq,dirichlet_sq,V_norm_sq,jump_flag\n";
    out.precision(17);
    for (const auto& r : rows)
        out << r.t << ',' << r.h_sq << ',' << r.dirichlet_sq << ',' << r.v_sq << ',' << (r.jump ? 1 : 0) << '\n';
}

double energy_balance_residual(const Trajectory& trajectory)
{
    const auto& s = trajectory.samples;
    if (s.empty())
        return 0.0;
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const double right = s[i + 1].jump ? s[i + 1].left_dirichlet_sq : s[i + 1].dirichlet_sq;
        integral += 0.5 * (s[i + 1].t - s[i].t) * (s[i].dirichlet_sq + right);
    }
    return s.back().h_sq + 2.0 * integral - s.front().h_sq;
}

double coupled_l2_distance(const Trajectory& a, const Trajectory& b)
{
    if (!a.has_states() || !b.has_states())
        throw std::invalid_argument("coupled_l2_distance: both trajectories need kept states");
    if (a.samples.size() != b.samples.size())
        throw std::invalid_argument("coupled_l2_distance: trajectories have different sample grids");
    std::map<std::size_t, const State*> left_a, left_b;
    for (const auto& j : a.jumps)
        if (j.left)
            left_a[j.sample] = &*j.left;
    for (const auto& j : b.jumps)
        if (j.left)
            left_b[j.sample] = &*j.left;

    auto dist_sq = [](const State& x, const State& y) {
        const State d = x - y;
        return inner_h(d, d);
    };
    double integral = 0.0;
    for (std::size_t i = 0; i + 1 < a.samples.size(); ++i) {
        if (a.samples[i].t != b.samples[i].t)
            throw std::invalid_argument("coupled_l2_distance: sample times differ");
        const State& ra = left_a.count(i + 1) ? *left_a[i + 1] : a.states[i + 1];
        const State& rb = left_b.count(i + 1) ? *left_b[i + 1] : b.states[i + 1];
        const double dt = a.samples[i + 1].t - a.samples[i].t;
        integral += 0.5 * dt * (dist_sq(a.states[i], b.states[i]) + dist_sq(ra, rb));
    }
    return std::sqrt(integral);
}

} // namespace hallspde
