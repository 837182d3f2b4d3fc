#include "hallspde/verify.hpp"

#include "hallspde/diagnostics.hpp"
#include "hallspde/mhd_operators.hpp"
#include "hallspde/skorokhod.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace hallspde {
namespace {

std::string fmt(double v)
{
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

class Suite {
public:
    Suite(std::string name, std::vector<CheckResult>& out) : name_(std::move(name)), out_(out) {}

    void check(const std::string& name, const std::function<std::pair<bool, std::string>()>& body)
    {
        CheckResult r{name_, name, false, {}};
        try {
            std::tie(r.passed, r.detail) = body();
        } catch (const std::exception& e) {
            r.detail = std::string("exception: ") + e.what();
        }
        out_.push_back(std::move(r));
    }

private:
    std::string name_;
    std::vector<CheckResult>& out_;
};

double rel(double a, double scale)
{
    return scale > 0.0 ? std::abs(a) / scale : std::abs(a);
}

std::pair<bool, std::string> within(double value, double tol, const std::string& what)
{
    return {value <= tol, what + " = " + fmt(value) + " (tol " + fmt(tol) + ")"};
}

double field_dist(const SpectralField& a, const SpectralField& b)
{
    const SpectralField d = a - b;
    return std::sqrt(inner_l2(d, d));
}

double field_norm(const SpectralField& a)
{
    return std::sqrt(inner_l2(a, a));
}

void spectral_suite(const SimConfig& c, Rng& rng, std::vector<CheckResult>& out)
{
    Suite s("spectral_space", out);
    const WaveGrid& g = c.grid;
    const CutoffLevel level = c.level();
    const double full = g.max_cutoff();

    // Raw field with all modes and a gradient part, so projections have work to do.
    std::normal_distribution<double> normal;
    PhysicalField p(g);
    for (auto& v : p.values)
        v = normal(rng);
    const SpectralField raw = to_spectral(p);
    const SpectralField other = to_spectral([&] {
        PhysicalField q(g);
        for (auto& v : q.values)
            v = normal(rng);
        return q;
    }());

    s.check("transform_roundtrip", [&] {
        const PhysicalField back = to_physical(raw);
        double err = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            err = std::max(err, std::abs(back.values[i] - p.values[i]));
            scale = std::max(scale, std::abs(p.values[i]));
        }
        return within(err / scale, 1e-12, "max relative error");
    });
    s.check("leray_idempotent", [&] {
        const SpectralField once = leray_project(raw);
        return within(field_dist(leray_project(once), once) / field_norm(once), 1e-13, "|PPf - Pf| / |Pf|");
    });
    s.check("leray_self_adjoint", [&] {
        const double a = inner_l2(leray_project(raw), other);
        const double b = inner_l2(raw, leray_project(other));
        return within(rel(a - b, field_norm(raw) * field_norm(other)), 1e-13, "relative asymmetry");
    });
    s.check("leray_divergence_free", [&] {
        return within(relative_divergence(leray_project(raw)), 1e-13, "relative divergence");
    });
    s.check("cutoff_algebra", [&] {
        const SpectralField a = cutoff(raw, level);
        const bool idem = cutoff(a, level) == a;
        const bool commute = cutoff(leray_project(raw), level) == leray_project(a);
        const double small = std::min(level.radius(), 0.5 * full);
        const bool nested = cutoff(cutoff(raw, CutoffLevel(small)), level) == cutoff(raw, CutoffLevel(small));
        return std::pair{idem && commute && nested, std::string(idem ? "" : "not idempotent; ") +
                                                        (commute ? "" : "does not commute with Leray; ") +
                                                        (nested ? "" : "nested levels disagree")};
    });
    s.check("cutoff_norm_nonincrease", [&] {
        bool ok = true;
        for (double sob : {0.0, 1.0, 2.0})
            ok = ok && sobolev_norm(cutoff(raw, level), SobolevIndex(sob)) <= sobolev_norm(raw, SobolevIndex(sob));
        return std::pair{ok, std::string(ok ? "" : "norm increased")};
    });
    s.check("cutoff_decay_bound", [&] {
        // |S_n u - u|^2_{H^s} <= (1+n^2)^-k |u|^2_{H^{s+k}}
        bool ok = true;
        std::string worst;
        for (double sob : {0.0, 1.0})
            for (double k : {1.0, 2.0}) {
                const SpectralField rest = cutoff(raw, level) - raw;
                const double lhs = std::pow(sobolev_norm(rest, SobolevIndex(sob)), 2);
                const double rhs = std::pow(1.0 + level.radius() * level.radius(), -k) *
                                   std::pow(sobolev_norm(raw, SobolevIndex(sob + k)), 2);
                if (!(lhs <= rhs)) {
                    ok = false;
                    worst = "s=" + fmt(sob) + " k=" + fmt(k) + ": " + fmt(lhs) + " > " + fmt(rhs);
                }
            }
        return std::pair{ok, worst};
    });
    s.check("embedding_bound", [&] {
        const State x = random_solenoidal_state(g, level, rng);
        const auto [lhs, rhs] = check_embedding_bound(x, 1.0, 2.0, level);
        return std::pair{lhs <= rhs * (1.0 + 1e-12), fmt(lhs) + " <= " + fmt(rhs)};
    });
}

void operator_suite(const SimConfig& c, Rng& rng, std::vector<CheckResult>& out)
{
    Suite s("mhd_operators", out);
    const WaveGrid& g = c.grid;
    const CutoffLevel level = c.level();
    PhysParams unit = c.params;
    unit.hartmann = 1.0;
    std::vector<State> phi;
    for (int i = 0; i < 3; ++i)
        phi.push_back(random_solenoidal_state(g, level, rng));

    s.check("mhd_cancellation", [&] {
        double worst = 0.0;
        for (const auto& x : phi) {
            const State r = mhd_riesz(x, c.params, level);
            worst = std::max(worst, rel(inner_h(r, x), h_norm(x) * h_norm(r)));
        }
        return within(worst, 1e-10, "relative <mhd(X), X>");
    });
    s.check("hall_cancellation", [&] {
        double worst = 0.0;
        PhysParams p = c.params;
        p.hall = p.hall > 0.0 ? p.hall : 1.0;
        for (const auto& x : phi) {
            const State r = hall_riesz(x, p, level);
            worst = std::max(worst, rel(inner_h(r, x), h_norm(x) * h_norm(r)));
        }
        return within(worst, 1e-10, "relative <hall(X), X>");
    });
    s.check("form_mhd_antisymmetry", [&] {
        const double a = form_mhd(phi[0], phi[1], phi[2]);
        const double b = form_mhd(phi[0], phi[2], phi[1]);
        return within(rel(a + b, std::abs(a) + std::abs(b)), 1e-10, "relative m(1,2,3) + m(1,3,2)");
    });
    s.check("form_hall_antisymmetry", [&] {
        const double a = form_thall(phi[0], phi[1], phi[2]);
        const double b = form_thall(phi[0], phi[2], phi[1]);
        return within(rel(a + b, std::abs(a) + std::abs(b)), 1e-10, "relative h(1,2,3) + h(1,3,2)");
    });
    s.check("mhd_duality", [&] {
        const double a = inner_h(mhd_riesz(phi[0], unit, level), phi[1]);
        const double b = form_mhd(phi[0], phi[0], phi[1]);
        return within(rel(a - b, std::abs(a) + std::abs(b)), 1e-10, "relative <mhd(X), Y> - m(X,X,Y)");
    });
    s.check("hall_duality", [&] {
        PhysParams p = unit;
        p.hall = 1.0;
        const double a = inner_h(hall_riesz(phi[0], p, level), phi[1]);
        const double b = form_thall(phi[0], phi[0], phi[1]);
        return within(rel(a - b, std::abs(a) + std::abs(b)), 1e-10, "relative <hall(X), Y> - h(X,X,Y)");
    });
    s.check("stokes_duality", [&] {
        const double a = inner_h(stokes_riesz(phi[0], c.params, level), phi[1]);
        const double b = dirichlet_form(phi[0], phi[1], c.params.nu1, c.params.nu2);
        return within(rel(a - b, std::abs(a) + std::abs(b)), 1e-12, "relative <A X, Y> - ((X, Y))");
    });
}

void noise_suite(const SimConfig& c, Rng& rng, std::vector<CheckResult>& out)
{
    Suite s("noise", out);
    s.check("wiener_zero_increment", [&] {
        WienerDriver d;
        d.dimension = 3;
        const auto dw = sample_wiener_increment(d, 0.0, rng);
        const bool ok = std::all_of(dw.begin(), dw.end(), [](double v) { return v == 0.0; });
        return std::pair{ok, std::string(ok ? "" : "nonzero increment at dt = 0")};
    });
    s.check("counting_law", [&] {
        const MarkSpace marks({{"a", 3.0}, {"b", 1.0}});
        const double T = 1.0, mean = T * 3.0;
        const std::size_t samples = 2000;
        const std::vector<std::size_t> subset{0};
        std::vector<double> counts(64, 0.0);
        for (std::size_t i = 0; i < samples; ++i) {
            const auto k = sample_jump_stream(marks, T, rng).count(T, subset);
            counts[std::min<std::size_t>(k, counts.size() - 1)] += 1.0;
        }
        boost::math::poisson_distribution<double> law(mean);
        double stat = 0.0, tail_obs = static_cast<double>(samples), tail_exp = 1.0;
        int bins = 0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            const double expected = samples * boost::math::pdf(law, static_cast<double>(k));
            if (expected < 5.0 || tail_exp * samples - expected < 5.0)
                break;
            stat += (counts[k] - expected) * (counts[k] - expected) / expected;
            tail_obs -= counts[k];
            tail_exp -= expected / samples;
            ++bins;
        }
        const double e_tail = tail_exp * samples;
        stat += (tail_obs - e_tail) * (tail_obs - e_tail) / e_tail;
        const double crit = boost::math::quantile(boost::math::chi_squared(bins), 0.99);
        return std::pair{stat <= crit, "chi2 = " + fmt(stat) + ", critical " + fmt(crit)};
    });
    s.check("compensated_mean_zero", [&] {
        const MarkSpace marks({{"a", 2.0}, {"b", 0.5}});
        const std::vector<double> w{1.0, -2.0};
        std::vector<double> values;
        for (int i = 0; i < 1000; ++i) {
            const JumpStream js = sample_jump_stream(marks, 1.0, rng);
            values.push_back(compensated_integral<double>(
                [&](double t, std::size_t y) { return w[y] * t; }, js, marks, 0.0));
        }
        const auto [mean, se] = mean_and_stderr(values);
        return std::pair{std::abs(mean) <= 3.0 * se, "mean " + fmt(mean) + ", stderr " + fmt(se)};
    });
    s.check("lipschitz_audit", [&] {
        if (c.marks.size() == 0)
            return std::pair{true, std::string("no marks configured")};
        const State a = random_solenoidal_state(c.grid, c.level(), rng);
        const State b = random_solenoidal_state(c.grid, c.level(), rng);
        const AuditResult r = audit_lipschitz(c.noise, c.marks, 0.0, a, b);
        return std::pair{r.lhs <= r.rhs * (1.0 + 1e-10), fmt(r.lhs) + " <= " + fmt(r.rhs)};
    });
}

void integrator_suite(const SimConfig& c, std::vector<CheckResult>& out)
{
    Suite s("integrator", out);
    s.check("heat_decay_exact", [&] {
        SimConfig h;
        h.grid = c.grid;
        h.cutoff = c.cutoff;
        h.params = c.params;
        h.nonlinear = false;
        h.horizon = 10 * c.dt;
        h.dt = c.dt;
        h.initial.kind = InitialCondition::Kind::single_mode;
        h.initial.amplitude_u = 1.0;
        h.initial.amplitude_B = 0.5;
        h.initial.mode = {1, 0, 0};
        h.initial.polarization = {0.0, 1.0, 0.0};
        h.noise = NoiseCoefficient::zero(h.grid, 0);
        const Trajectory t = simulate(h, 0);
        const double k2 = h.grid.unit() * h.grid.unit();
        const double T = h.horizon;
        const State x0 = initial_state(h);
        const double eu = inner_l2(x0.u, x0.u) * std::exp(-2.0 * h.params.nu1 * k2 * T);
        const double eb = inner_l2(x0.B, x0.B) * std::exp(-2.0 * h.params.nu2 * k2 * T);
        return within(rel(t.samples.back().h_sq - (eu + eb), eu + eb), 1e-12, "relative energy error");
    });
    s.check("deterministic_replay", [&] {
        SimConfig r = c;
        r.horizon = std::min(c.horizon, 5 * c.dt);
        const Trajectory a = simulate(r, 0), b = simulate(r, 0);
        bool same = a.samples.size() == b.samples.size();
        for (std::size_t i = 0; same && i < a.samples.size(); ++i)
            same = a.samples[i].t == b.samples[i].t && a.samples[i].h_sq == b.samples[i].h_sq &&
                   a.samples[i].dirichlet_sq == b.samples[i].dirichlet_sq;
        return std::pair{same, std::string(same ? "" : "replay differs")};
    });
    s.check("jumps_recorded_as_cadlag_samples", [&] {
        SimConfig r = c;
        r.horizon = std::min(c.horizon, 10 * c.dt);
        // Rescale intensities to about five expected jumps; only the bookkeeping is under test.
        if (r.marks.size() > 0) {
            std::vector<Mark> boosted(r.marks.marks().begin(), r.marks.marks().end());
            const double factor = 5.0 / (r.marks.total_mass() * r.horizon);
            for (auto& m : boosted)
                m.weight *= factor;
            r.marks = MarkSpace(std::move(boosted));
        }
        const Trajectory t = simulate(r, 0);
        bool ok = t.jumps.size() == t.stream.events.size();
        for (const auto& j : t.jumps)
            ok = ok && j.sample < t.samples.size() && t.samples[j.sample].jump && t.samples[j.sample].t == j.time;
        for (std::size_t i = 1; i < t.samples.size(); ++i)
            ok = ok && t.samples[i].t > t.samples[i - 1].t;
        return std::pair{ok, std::to_string(t.jumps.size()) + " jumps"};
    });
}

void diagnostics_suite(const SimConfig& c, Rng& rng, std::vector<CheckResult>& out)
{
    Suite s("diagnostics", out);
    s.check("taylor_frozen_constants", [&] {
        const WaveGrid g(4, c.grid.box_length());
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> logscale(-3.0, 3.0);
        bool ok = true;
        std::string worst;
        for (int q : {2, 4})
            for (int i = 0; i < 200; ++i) {
                State x = random_solenoidal_state(g, CutoffLevel(g.max_cutoff()), rng);
                State h = random_solenoidal_state(g, CutoffLevel(g.max_cutoff()), rng);
                h *= std::pow(10.0, logscale(rng));
                const auto [lhs, rhs] = taylor_check(x, h, q, frozen_taylor_constant(q));
                // q = 2 is an identity, so allow for cancellation in the left side.
                const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::pow(h_norm(x) + h_norm(h), q);
                if (lhs > rhs * (1.0 + 1e-12) + slack) {
                    ok = false;
                    worst = "q=" + std::to_string(q) + ": " + fmt(lhs) + " > " + fmt(rhs);
                }
            }
        return std::pair{ok, worst};
    });
    s.check("gronwall_admissibility", [&] {
        GronwallInput in;
        in.beta = 1.0;
        in.Z = {1.0};
        try {
            gronwall_bound(in, 0.0);
        } catch (const std::invalid_argument&) {
            in.beta = 0.0;
            const double b = gronwall_bound(in, 1.0);
            return std::pair{b == 2.0, "trivial bound " + fmt(b)};
        }
        return std::pair{false, std::string("beta = 1, C = 0 accepted")};
    });
    s.check("skorokhod_examples", [&] {
        const double T = 1.0;
        const auto step = CadlagPath::piecewise_constant(T, {0.0, 0.5}, {0.0, 1.0});
        const auto flat = CadlagPath::piecewise_constant(T, {0.0}, {2.0});
        const bool modulus = skorokhod_modulus(step, 0.3) == 0.0 && skorokhod_modulus(step, 0.7) == 1.0 &&
                             skorokhod_modulus(flat, 0.3) == 0.0;
        const bool self = skorokhod_distance(step, step) == 0.0;
        const auto taller = CadlagPath::piecewise_constant(T, {0.0, 0.5}, {0.0, 1.01});
        const bool close = skorokhod_distance(step, taller) <= 0.01 + 1e-15;
        return std::pair{modulus && self && close, std::string(modulus ? "" : "modulus; ") + (self ? "" : "self; ") +
                                                        (close ? "" : "jump-size bound")};
    });
}

} // namespace

std::vector<CheckResult> run_property_suites(const SimConfig& config)
{
    config.validate();
    std::vector<CheckResult> out;
    Rng rng(trajectory_seed(config.seed, 0, Substream::initial) ^ 0x766572696679ULL);
    spectral_suite(config, rng, out);
    operator_suite(config, rng, out);
    noise_suite(config, rng, out);
    integrator_suite(config, out);
    diagnostics_suite(config, rng, out);
    return out;
}

} // namespace hallspde
