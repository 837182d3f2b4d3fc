#include "support.hpp"

#include "hallspde/diagnostics.hpp"
#include "hallspde/mhd_operators.hpp"

#include <doctest.h>

#include <sstream>

using namespace testing;

namespace {

SimConfig base_config(int n = 8)
{
    SimConfig c;
    c.grid = WaveGrid(n, two_pi);
    c.cutoff = n / 2.0;
    c.params.nu1 = 0.2;
    c.params.nu2 = 0.3;
    c.params.hall = 0.5;
    c.horizon = 0.05;
    c.dt = 0.005;
    c.noise = NoiseCoefficient::zero(c.grid, 0);
    return c;
}

void set_marks(SimConfig& c, std::vector<Mark> marks, NoiseKind kind, std::vector<double> scales,
               std::vector<State> amplitudes)
{
    c.marks = MarkSpace(std::move(marks));
    c.noise = NoiseCoefficient::zero(c.grid, c.marks.size());
    c.noise.kind = kind;
    c.noise.scale = std::move(scales);
    c.noise.amplitude = std::move(amplitudes);
}

// exp(-nu |k|^2 h) per component, written out independently of the library.
State heat(const State& x, const PhysParams& p, double h)
{
    State out = x;
    const WaveGrid& g = x.grid();
    for (std::size_t m = 0; m < g.size(); ++m) {
        const auto k = g.integer_wavevector(m);
        const double k2 = std::pow(g.unit(), 2) * (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        for (int c = 0; c < 3; ++c) {
            out.u.at(c, m) *= std::exp(-p.nu1 * k2 * h);
            out.B.at(c, m) *= std::exp(-p.nu2 * k2 * h);
        }
    }
    return out;
}

bool same_samples(const Trajectory& a, const Trajectory& b)
{
    if (a.samples.size() != b.samples.size())
        return false;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        if (a.samples[i].t != b.samples[i].t || a.samples[i].h_sq != b.samples[i].h_sq ||
            a.samples[i].dirichlet_sq != b.samples[i].dirichlet_sq || a.samples[i].jump != b.samples[i].jump)
            return false;
    return true;
}

} // namespace

TEST_CASE("configuration validation")
{
    SimConfig c = base_config();
    CHECK_NOTHROW(c.validate());
    c.dt = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = base_config();
    c.cutoff = 5.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = base_config();
    c.ensemble_size = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = base_config();
    c.moment_orders = {1};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = base_config();
    c.marks = MarkSpace({{"a", 1.0}});
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("initial states")
{
    SimConfig c = base_config(8);
    const double cells = 512.0;
    c.initial.kind = InitialCondition::Kind::abc;
    c.initial.amplitude_u = 2.0;
    c.initial.amplitude_B = 0.5;
    State x = initial_state(c);
    // Each ABC component has mean square 1 per unit amplitude.
    CHECK(inner_l2(x.u, x.u) == doctest::Approx(4.0 * 3.0 * cells).epsilon(1e-12));
    CHECK(inner_l2(x.B, x.B) == doctest::Approx(0.25 * 3.0 * cells).epsilon(1e-12));

    c.initial.kind = InitialCondition::Kind::taylor_green;
    x = initial_state(c);
    CHECK(inner_l2(x.u, x.u) == doctest::Approx(4.0 * cells / 4.0).epsilon(1e-12));
    CHECK(relative_divergence(x.u) <= 1e-14);

    c.initial.kind = InitialCondition::Kind::single_mode;
    c.initial.mode = {1, 0, 0};
    c.initial.polarization = {0.0, 1.0, 0.0};
    x = initial_state(c);
    CHECK(inner_l2(x.u, x.u) == doctest::Approx(4.0 * cells / 2.0).epsilon(1e-12));
    // Longitudinal polarization is removed by the projection.
    c.initial.polarization = {1.0, 0.0, 0.0};
    CHECK(h_norm(initial_state(c)) <= 1e-12);

    c.initial.kind = InitialCondition::Kind::random;
    c.initial.max_mode = 2;
    c.seed = 5;
    x = initial_state(c);
    CHECK(x == initial_state(c));
    CHECK(within_cutoff(x, CutoffLevel(2.0)));
    CHECK(inner_l2(x.u, x.u) / cells == doctest::Approx(4.0).epsilon(1e-12));
    c.seed = 6;
    CHECK(!(x == initial_state(c)));
}

TEST_CASE("heat decay is exact")
{
    SimConfig c = base_config(8);
    c.nonlinear = false;
    c.initial.kind = InitialCondition::Kind::single_mode;
    c.initial.mode = {1, 2, 0};
    c.initial.polarization = {0.0, 0.0, 1.0};
    c.initial.amplitude_u = 1.0;
    c.initial.amplitude_B = 0.5;
    c.horizon = 0.3;
    c.dt = 0.01;
    const Trajectory t = simulate(c, 0);
    const double k2 = 5.0;
    const double expect =
        512.0 / 2.0 * (std::exp(-2 * c.params.nu1 * k2 * 0.3) + 0.25 * std::exp(-2 * c.params.nu2 * k2 * 0.3));
    CHECK(t.samples.back().h_sq == doctest::Approx(expect).epsilon(1e-12));
    CHECK(t.samples.size() == 31);
    CHECK(t.samples.back().t == 0.3);
    // Energy decreases monotonically with exactly integrated dissipation.
    for (std::size_t i = 1; i < t.samples.size(); ++i)
        CHECK(t.samples[i].h_sq < t.samples[i - 1].h_sq);
    CHECK(std::abs(energy_balance_residual(t)) <= 1e-3 * t.samples.front().h_sq);
}

TEST_CASE("forced linear response follows the discrete recursion")
{
    // ABC forcing is an eigenfunction with |k|^2 = 1, so from rest
    // u_K = e^{-nu h} h f (1 - e^{-nu h K}) / (1 - e^{-nu h}).
    SimConfig c = base_config(8);
    c.nonlinear = false;
    c.forcing.kind = Forcing::Kind::abc;
    c.forcing.amplitude_u = 1.0;
    c.forcing.amplitude_B = -0.4;
    c.horizon = 0.5;
    c.dt = 0.01;
    SimOptions keep;
    keep.keep_states = true;
    const Trajectory t = simulate(c, 0, keep);
    const State f = forcing_state(c);
    const double h = c.dt;
    auto factor = [&](double nu) {
        const double e = std::exp(-nu * h);
        return e * h * (1.0 - std::exp(-nu * c.horizon)) / (1.0 - e);
    };
    const State expect(factor(c.params.nu1) * f.u, factor(c.params.nu2) * f.B);
    CHECK(distance(t.states.back(), expect) <= 1e-12 * h_norm(expect));
}

TEST_CASE("additive jumps follow the exponential Euler recursion")
{
    SimConfig c = base_config(8);
    c.nonlinear = false;
    c.horizon = 0.5;
    c.dt = 0.02;
    c.initial.kind = InitialCondition::Kind::random;
    c.initial.amplitude_u = c.initial.amplitude_B = 1.0;
    const State d0 = random_state(c.grid, 4.0, 1, 0.5), d1 = random_state(c.grid, 2.0, 2, 0.3);
    set_marks(c, {{"a", 4.0}, {"b", 6.0}}, NoiseKind::additive, {}, {d0, d1});
    c.seed = 77;
    SimOptions keep;
    keep.keep_states = true;
    const Trajectory t = simulate(c, 3, keep);
    REQUIRE(t.jumps.size() >= 2);

    const State drift = 4.0 * d0 + 6.0 * d1;
    State x = initial_state(c);
    std::size_t next = 0;
    for (std::size_t i = 1; i < t.samples.size(); ++i) {
        const double h = t.samples[i].t - t.samples[i - 1].t;
        State y = x;
        y.axpy(-h, drift);
        x = heat(y, c.params, h);
        if (t.samples[i].jump) {
            REQUIRE(next < t.stream.events.size());
            x += t.stream.events[next].mark == 0 ? d0 : d1;
            ++next;
        }
        CHECK(distance(x, t.states[i]) <= 1e-12 * h_norm(x));
    }
    CHECK(next == t.stream.events.size());
}

TEST_CASE("trajectory invariants with nonlinear multiplicative noise")
{
    SimConfig c = base_config(8);
    c.cutoff = 3.0;
    c.horizon = 0.1;
    c.dt = 0.005;
    c.initial.kind = InitialCondition::Kind::random;
    c.initial.amplitude_u = c.initial.amplitude_B = 0.5;
    set_marks(c, {{"up", 20.0}, {"down", 20.0}}, NoiseKind::linear_multiplicative, {0.2, -0.2},
              {random_state(c.grid, 3.0, 3, 0.1), State(c.grid)});
    c.seed = 11;
    SimOptions keep;
    keep.keep_states = true;
    const Trajectory t = simulate(c, 0, keep);
    REQUIRE(t.jumps.size() >= 1);
    REQUIRE(t.states.size() == t.samples.size());

    const CutoffLevel level = c.level();
    for (const auto& s : t.states) {
        CHECK(within_cutoff(s, level));
        CHECK(relative_divergence(s.u) <= 1e-10);
        CHECK(relative_divergence(s.B) <= 1e-10);
    }
    for (std::size_t i = 1; i < t.samples.size(); ++i)
        CHECK(t.samples[i].t > t.samples[i - 1].t);

    for (const auto& j : t.jumps) {
        REQUIRE(j.left);
        REQUIRE(j.increment);
        CHECK(t.samples[j.sample].jump);
        CHECK(t.samples[j.sample].t == j.time);
        const State expect = project_state(eval_F(c.noise, j.time, *j.left, j.mark), level);
        CHECK(*j.increment == expect);
        CHECK(distance(t.states[j.sample] - *j.left, expect) <= 1e-15 * h_norm(t.states[j.sample]));
        CHECK(t.samples[j.sample].left_h_sq == doctest::Approx(inner_h(*j.left, *j.left)).epsilon(1e-14));
    }

    SUBCASE("deterministic replay")
    {
        const Trajectory again = simulate(c, 0, keep);
        CHECK(same_samples(t, again));
        CHECK(t.states == again.states);
        CHECK(!same_samples(t, simulate(c, 1)));
    }
    SUBCASE("right-continuous lookup")
    {
        const auto& j = t.jumps.front();
        CHECK(t.state_at(j.time) == t.states[j.sample]);
        CHECK(t.state_at(c.horizon) == t.states.back());
        CHECK(t.state_at(0.0) == t.states.front());
    }
}

TEST_CASE("pure multiplicative noise keeps the zero state")
{
    SimConfig c = base_config(8);
    set_marks(c, {{"a", 50.0}}, NoiseKind::linear_multiplicative, {0.5}, {State(c.grid)});
    c.seed = 3;
    const Trajectory t = simulate(c, 0);
    CHECK(!t.jumps.empty());
    for (const auto& s : t.samples)
        CHECK(s.h_sq == 0.0);
    for (const auto& r : energy_series(t)) {
        CHECK(r.h_sq == 0.0);
        CHECK(r.v_sq == 0.0);
    }
}

TEST_CASE("deterministic energy behaviour")
{
    SimConfig c = base_config(8);
    c.initial.kind = InitialCondition::Kind::taylor_green;
    c.initial.amplitude_u = 1.0;
    c.initial.amplitude_B = 0.5;
    c.horizon = 0.2;
    c.dt = 0.01;
    SimOptions keep;
    keep.keep_states = true;
    const Trajectory t = simulate(c, 0, keep);
    // Explicit Euler adds exactly h^2 |N(X)|^2 before the dissipative factor.
    for (std::size_t i = 0; i + 1 < t.samples.size(); ++i) {
        const NonlinearTerms nl = nonlinear_riesz(t.states[i], c.params, c.level());
        const State total = nl.mhd + nl.hall;
        const double bound = t.samples[i].h_sq + c.dt * c.dt * inner_h(total, total);
        CHECK(t.samples[i + 1].h_sq <= bound * (1.0 + 1e-12));
    }

    // Energy balance residual shrinks with the step.
    c.dt = 0.004;
    const double r1 = std::abs(energy_balance_residual(simulate(c, 0)));
    c.dt = 0.002;
    const double r2 = std::abs(energy_balance_residual(simulate(c, 0)));
    CHECK(r2 < r1);
    CHECK(r1 / r2 > 1.5);
}

TEST_CASE("energy series")
{
    SimConfig c = base_config(8);
    c.nonlinear = false;
    c.initial.kind = InitialCondition::Kind::single_mode;
    c.initial.mode = {0, 1, 1};
    c.initial.polarization = {1.0, 0.0, 0.0};
    c.initial.amplitude_u = 3.0;
    const Trajectory t = simulate(c, 0);
    const auto rows = energy_series(t);
    REQUIRE(rows.size() == t.samples.size());
    CHECK(rows[0].h_sq == doctest::Approx(9.0 * 256.0));
    CHECK(rows[0].dirichlet_sq == doctest::Approx(c.params.nu1 * 2.0 * 9.0 * 256.0));
    CHECK(rows[0].v_sq == doctest::Approx(rows[0].h_sq + rows[0].dirichlet_sq));

    // Random state against physical-space quadrature.
    const State x = random_state(c.grid, 4.0, 8);
    const auto e = energy_of(x, c.params);
    const PhysicalField pu = to_physical(x.u), pb = to_physical(x.B);
    double sum = 0.0;
    for (std::size_t i = 0; i < pu.values.size(); ++i)
        sum += pu.values[i] * pu.values[i] + pb.values[i] * pb.values[i];
    CHECK(e[0] == doctest::Approx(sum).epsilon(1e-12));

    std::ostringstream out;
    write_energy_csv(out, rows);
    CHECK(out.str().rfind("t,H_norm_sq,dirichlet_sq,V_norm_sq,jump_flag\n0,", 0) == 0);
}

TEST_CASE("blow-up guard")
{
    SimConfig c = base_config(8);
    c.initial.kind = InitialCondition::Kind::abc;
    c.initial.amplitude_u = 1.0;
    c.guard_radius = 1.0;
    const Trajectory t = simulate(c, 0);
    CHECK(t.guard_hit);
    CHECK(t.guard_time == 0.0);
    CHECK(t.samples.size() == 1);

    c.guard_radius = 0.0;
    const Trajectory ok = simulate(c, 0);
    CHECK(!ok.guard_hit);
    CHECK(ok.guard_radius == doctest::Approx(1e6 * std::sqrt(3.0 * 512.0)));
}

TEST_CASE("ensembles")
{
    SimConfig c = base_config(8);
    c.cutoff = 3.0;
    c.initial.kind = InitialCondition::Kind::random;
    c.initial.amplitude_u = c.initial.amplitude_B = 0.5;
    set_marks(c, {{"a", 30.0}}, NoiseKind::linear_multiplicative, {0.3}, {State(c.grid)});
    c.seed = 2024;
    c.ensemble_size = 6;

    const auto serial = run_ensemble(c, 1);
    const auto parallel = run_ensemble(c, 3);
    REQUIRE(serial.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(serial[i].index == i);
        CHECK(same_samples(serial[i], parallel[i]));
        CHECK(same_samples(serial[i], simulate(c, i)));
    }
    const auto m1 = moment_report(serial, c.moment_orders, 0.0, c.cutoff);
    const auto m3 = moment_report(parallel, c.moment_orders, 0.0, c.cutoff);
    CHECK(m1.at(2).sup_mean == m3.at(2).sup_mean);
    CHECK(m1.at(4).dissipation_mean == m3.at(4).dissipation_mean);

    SimConfig one = c;
    one.ensemble_size = 1;
    CHECK(same_samples(run_ensemble(one).front(), simulate(c, 0)));

    // A failing trajectory propagates out of the pool.
    SimConfig bad = c;
    bad.noise.kind = NoiseKind::user;
    bad.noise.user = [](double, const State&, std::size_t) -> State { throw std::runtime_error("boom"); };
    bad.marks = MarkSpace({{"a", 1e6}});
    CHECK_THROWS_AS(run_ensemble(bad, 2), std::runtime_error);
}

TEST_CASE("mean energy is consistent under step halving")
{
    SimConfig c = base_config(8);
    c.cutoff = 3.0;
    c.horizon = 0.1;
    c.dt = 0.01;
    c.initial.kind = InitialCondition::Kind::random;
    c.initial.amplitude_u = c.initial.amplitude_B = 0.5;
    set_marks(c, {{"up", 10.0}, {"down", 10.0}}, NoiseKind::linear_multiplicative, {0.2, -0.2},
              {State(c.grid), State(c.grid)});
    c.seed = 99;
    c.ensemble_size = 200;

    auto final_energy = [](const SimConfig& cfg) {
        std::vector<double> e;
        for (const auto& t : run_ensemble(cfg))
            e.push_back(t.samples.back().h_sq);
        return e;
    };
    const auto coarse = final_energy(c);
    c.dt = 0.005;
    const auto fine = final_energy(c);
    const auto [m1, s1] = mean_and_stderr(coarse);
    const auto [m2, s2] = mean_and_stderr(fine);
    // Jump streams do not depend on the step, so the ensembles are coupled;
    // the unpaired bound is conservative. Discretization allowance: 1% of the mean.
    CHECK(std::abs(m1 - m2) <= 3.0 * std::hypot(s1, s2) + 0.01 * m2);
}

TEST_CASE("coupled distance")
{
    SimConfig c = base_config(8);
    c.initial.kind = InitialCondition::Kind::abc;
    c.initial.amplitude_u = 0.3;
    c.initial.amplitude_B = 0.3;
    c.nonlinear = false;
    SimOptions keep;
    keep.keep_states = true;
    const Trajectory a = simulate(c, 0, keep);
    CHECK(coupled_l2_distance(a, a) == 0.0);
    // Zero trajectory against pure decay of an eigenfunction with |k|^2 = 1.
    SimConfig z = c;
    z.initial.kind = InitialCondition::Kind::zero;
    const Trajectory b = simulate(z, 0, keep);
    const double e0u = 0.09 * 3.0 * 512.0, e0b = e0u;
    const double nu1 = c.params.nu1, nu2 = c.params.nu2, T = c.horizon;
    const double exact = e0u * (1 - std::exp(-2 * nu1 * T)) / (2 * nu1) + e0b * (1 - std::exp(-2 * nu2 * T)) / (2 * nu2);
    CHECK(coupled_l2_distance(a, b) == doctest::Approx(std::sqrt(exact)).epsilon(1e-4));
    CHECK_THROWS_AS(coupled_l2_distance(a, simulate(c, 0)), std::invalid_argument);
}
