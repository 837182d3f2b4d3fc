#include "support.hpp"

#include "hallspde/mhd_operators.hpp"

#include <doctest.h>

using namespace testing;

namespace {

using Vec = std::array<double, 3>;

// Band-limited test fields with hand-written derivatives. grad[i][j] = d_j f_i.
struct Analytic {
    std::function<Vec(double, double, double)> f;
    std::function<std::array<Vec, 3>(double, double, double)> grad;
};

Analytic field_a()
{
    return {[](double x, double y, double z) { return Vec{std::sin(y) + std::cos(2 * z), std::cos(x), std::sin(x + y)}; },
            [](double x, double y, double z) {
                return std::array<Vec, 3>{Vec{0.0, std::cos(y), -2 * std::sin(2 * z)}, Vec{-std::sin(x), 0.0, 0.0},
                                          Vec{std::cos(x + y), std::cos(x + y), 0.0}};
            }};
}

Analytic field_b()
{
    return {[](double x, double y, double z) { return Vec{std::cos(z), std::sin(2 * x) * std::cos(y), std::sin(y)}; },
            [](double x, double y, double z) {
                return std::array<Vec, 3>{Vec{0.0, 0.0, -std::sin(z)},
                                          Vec{2 * std::cos(2 * x) * std::cos(y), -std::sin(2 * x) * std::sin(y), 0.0},
                                          Vec{0.0, std::cos(y), 0.0}};
            }};
}

Analytic field_c()
{
    return {[](double x, double, double z) { return Vec{std::sin(z), std::cos(x + z), std::cos(x)}; },
            [](double x, double, double z) {
                return std::array<Vec, 3>{Vec{0.0, 0.0, std::cos(z)},
                                          Vec{-std::sin(x + z), 0.0, -std::sin(x + z)}, Vec{-std::sin(x), 0.0, 0.0}};
            }};
}

Vec curl_of(const std::array<Vec, 3>& d)
{
    return {d[2][1] - d[1][2], d[0][2] - d[2][0], d[1][0] - d[0][1]};
}

Vec cross3(const Vec& a, const Vec& b)
{
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot3(const Vec& a, const Vec& b)
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Grid sum at resolution N, evaluated as a sum over a 2N grid divided by 8.
template <class F>
double doubled_sum(int n, F integrand)
{
    const int m = 2 * n;
    const double h = two_pi / m;
    double s = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int l = 0; l < m; ++l)
                s += integrand(i * h, j * h, l * h);
    return s / 8.0;
}

double b_oracle(int n, const Analytic& u, const Analytic& w, const Analytic& v)
{
    return doubled_sum(n, [&](double x, double y, double z) {
        const Vec uu = u.f(x, y, z), vv = v.f(x, y, z);
        const auto d = w.grad(x, y, z);
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            s += dot3(uu, d[i]) * vv[i];
        return s;
    });
}

double hall_oracle(int n, const Analytic& u, const Analytic& w, const Analytic& v)
{
    return doubled_sum(n, [&](double x, double y, double z) {
        return -dot3(cross3(u.f(x, y, z), curl_of(w.grad(x, y, z))), curl_of(v.grad(x, y, z)));
    });
}

double v_norm(const State& x)
{
    return std::hypot(sobolev_norm(x.u, SobolevIndex(1.0)), sobolev_norm(x.B, SobolevIndex(1.0)));
}

PhysParams unit_params(double hall = 1.0)
{
    PhysParams p;
    p.hall = hall;
    return p;
}

// Real orthogonal basis of the solenoidal part of H_n: constant vectors and
// cos/sin modes with two transverse polarizations, placed in u or in B.
std::vector<State> solenoidal_basis(const WaveGrid& g, CutoffLevel level)
{
    std::vector<State> basis;
    auto push = [&](const SpectralField& f, bool magnetic) {
        State s(g);
        (magnetic ? s.B : s.u) = f;
        basis.push_back(s);
    };
    for (bool magnetic : {false, true}) {
        for (int c = 0; c < 3; ++c) {
            SpectralField f(g);
            f.at(c, 0) = 1.0;
            push(f, magnetic);
        }
        for (std::size_t m = 1; m < g.size(); ++m) {
            if (g.is_nyquist(m) || g.wavevector_norm_sq(m) > level.radius() * level.radius())
                continue;
            const auto k = g.integer_wavevector(m);
            // One representative of each +-k pair.
            if (k > std::array<int, 3>{-k[0], -k[1], -k[2]})
                continue;
            const auto idx = g.indices(m);
            const int n = g.resolution();
            const std::size_t mirror = g.flat((n - idx[0]) % n, (n - idx[1]) % n, (n - idx[2]) % n);
            Vec e1 = std::abs(k[0]) <= std::abs(k[2]) ? Vec{0.0, -double(k[2]), double(k[1])}
                                                       : Vec{-double(k[1]), double(k[0]), 0.0};
            if (dot3(e1, e1) == 0.0)
                e1 = {double(k[2]), 0.0, -double(k[0])};
            const Vec e2 = cross3(Vec{double(k[0]), double(k[1]), double(k[2])}, e1);
            for (const Vec& e : {e1, e2})
                for (Complex phase : {Complex(1.0, 0.0), Complex(0.0, 1.0)}) {
                    SpectralField f(g);
                    for (int c = 0; c < 3; ++c) {
                        f.at(c, m) = phase * e[c];
                        f.at(c, mirror) = std::conj(phase) * e[c];
                    }
                    push(f, magnetic);
                }
        }
    }
    return basis;
}

} // namespace

TEST_CASE("Stokes operator")
{
    const WaveGrid g(8, two_pi);
    const CutoffLevel level(4.0);
    PhysParams p;
    p.nu1 = 0.3;
    p.nu2 = 0.7;

    State one(g);
    const std::size_t m = g.flat(1, 2, g.index_of(-1));
    one.u.at(1, m) = Complex(0.5, -1.0);
    one.B.at(2, m) = Complex(2.0, 0.0);
    const State a = stokes_riesz(one, p, level);
    CHECK(std::abs(a.u.at(1, m) - 0.3 * 6.0 * Complex(0.5, -1.0)) < 1e-14);
    CHECK(std::abs(a.B.at(2, m) - 0.7 * 6.0 * 2.0) < 1e-14);
    CHECK(h_norm(stokes_riesz(State(g), p, level)) == 0.0);

    const State x = random_state(g, 4.0, 1);
    const State y = random_state(g, 4.0, 2);
    CHECK(inner_h(stokes_riesz(x, p, level), y) == doctest::Approx(dirichlet_form(x, y, p.nu1, p.nu2)).epsilon(1e-12));
    CHECK(inner_h(stokes_riesz(x, p, level), x) == doctest::Approx(dirichlet_form(x, x, p.nu1, p.nu2)).epsilon(1e-12));

    const State e = stokes_propagate(one, p, 0.25);
    CHECK(std::abs(e.u.at(1, m) - std::exp(-0.3 * 6.0 * 0.25) * Complex(0.5, -1.0)) < 1e-15);
    CHECK(std::abs(e.B.at(2, m) - std::exp(-0.7 * 6.0 * 0.25) * 2.0) < 1e-15);

    CHECK_THROWS_AS(stokes_riesz(random_state(g, 4.0, 3), p, CutoffLevel(2.0)), std::invalid_argument);
    PhysParams bad;
    bad.nu1 = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("trilinear form against quadrature")
{
    const int n = 8;
    const WaveGrid g(n, two_pi);
    const Analytic a = field_a(), b = field_b(), c = field_c();
    const SpectralField fa = field(g, a.f), fb = field(g, b.f), fc = field(g, c.f);

    CHECK(trilinear_b(fa, fb, fc) == doctest::Approx(b_oracle(n, a, b, c)).epsilon(1e-12));
    CHECK(trilinear_b(fc, fa, fb) == doctest::Approx(b_oracle(n, c, a, b)).epsilon(1e-12));
    CHECK(trilinear_b(fb, fc, fa) == doctest::Approx(b_oracle(n, b, c, a)).epsilon(1e-12));

    const SpectralField constant = field(g, [](double, double, double) { return Vec{1.0, -2.0, 3.0}; });
    CHECK(trilinear_b(fa, constant, fb) == doctest::Approx(0.0).scale(1.0));

    // b(u, v, v) = 0 for solenoidal u; a and c are divergence-free.
    const State x = random_state(g, 4.0, 4);
    CHECK(std::abs(trilinear_b(x.u, x.B, x.B)) <= 1e-10 * norm(x.u) * std::pow(sobolev_norm(x.B, SobolevIndex(1)), 2));
    CHECK(std::abs(trilinear_b(fa, fb, fb)) <= 1e-10 * norm(fa) * std::pow(norm(fb), 2));
}

TEST_CASE("MHD form")
{
    const WaveGrid g(8, two_pi);
    const State p1 = random_state(g, 4.0, 5), p2 = random_state(g, 4.0, 6), p3 = random_state(g, 4.0, 7);
    const double scale = h_norm(p1) * v_norm(p2) * v_norm(p3);
    CHECK(std::abs(form_mhd(p1, p2, p3) + form_mhd(p1, p3, p2)) <= 1e-10 * scale);
    CHECK(std::abs(form_mhd(p1, p2, p2)) <= 1e-10 * scale);

    const State u1(p1.u, SpectralField(g)), u2(p2.u, SpectralField(g)), u3(p3.u, SpectralField(g));
    CHECK(form_mhd(u1, u2, u3) == doctest::Approx(trilinear_b(p1.u, p2.u, p3.u)).epsilon(1e-14));
    CHECK(form_mhd(p1, p2, p3) ==
          doctest::Approx(trilinear_b(p1.u, p2.u, p3.u) - trilinear_b(p1.B, p2.B, p3.u) +
                          trilinear_b(p1.u, p2.B, p3.B) - trilinear_b(p1.B, p2.u, p3.B))
              .epsilon(1e-12));
}

TEST_CASE("Hall form")
{
    const int n = 8;
    const WaveGrid g(n, two_pi);
    const Analytic a = field_a(), b = field_b(), c = field_c();
    const SpectralField fa = field(g, a.f), fb = field(g, b.f), fc = field(g, c.f);

    CHECK(form_hall(fa, fb, fc) == doctest::Approx(hall_oracle(n, a, b, c)).epsilon(1e-12));
    CHECK(form_hall(fc, fa, fb) == doctest::Approx(hall_oracle(n, c, a, b)).epsilon(1e-12));

    const State x = random_state(g, 4.0, 8), y = random_state(g, 4.0, 9);
    const double scale = norm(x.u) * v_norm(x) * v_norm(y);
    CHECK(std::abs(form_hall(x.u, x.B, x.B)) <= 1e-10 * scale);
    CHECK(std::abs(form_hall(x.u, x.B, y.B) + form_hall(x.u, y.B, x.B)) <= 1e-10 * scale);
    CHECK(form_thall(x, x, y) == form_hall(x.B, x.B, y.B));
}

TEST_CASE("MHD Riesz map")
{
    const WaveGrid g(8, two_pi);
    const CutoffLevel level(4.0);
    const PhysParams p = unit_params();

    SUBCASE("energy orthogonality, scaling and locality")
    {
        for (std::uint64_t seed = 10; seed < 15; ++seed) {
            const State x = random_state(g, 4.0, seed);
            const State r = mhd_riesz(x, p, level);
            CHECK(std::abs(inner_h(r, x)) <= 1e-10 * h_norm(x) * h_norm(r));
            CHECK(within_cutoff(r, level));
            CHECK(relative_divergence(r.u) <= 1e-13);
            CHECK(relative_divergence(r.B) <= 1e-13);
            const State r3 = mhd_riesz(3.0 * x, p, level);
            CHECK(distance(r3, 9.0 * r) <= 1e-12 * h_norm(r3));
            const State y = random_state(g, 4.0, seed + 100);
            CHECK(inner_h(r, y) == doctest::Approx(form_mhd(x, x, y)).epsilon(1e-9));
        }
    }
    SUBCASE("zero magnetic field gives projected advection")
    {
        // Taylor-Green velocity; (u.grad)u written out by hand.
        auto tg = [](double x, double y, double z) {
            return Vec{std::sin(x) * std::cos(y) * std::cos(z), -std::cos(x) * std::sin(y) * std::cos(z), 0.0};
        };
        auto adv = [](double x, double y, double z) {
            const double cz2 = std::cos(z) * std::cos(z);
            return Vec{0.5 * std::sin(2 * x) * cz2, 0.5 * std::sin(2 * y) * cz2, 0.0};
        };
        const WaveGrid g16(16, two_pi);
        const CutoffLevel wide(8.0);
        const State x(cutoff(field(g16, tg), wide), SpectralField(g16));
        const State r = mhd_riesz(x, p, wide);
        const SpectralField expect = leray_project(field(g16, adv));
        CHECK(distance(r.u, expect) <= 1e-12 * (norm(expect) + 1.0));
        CHECK(norm(r.B) == 0.0);
    }
    SUBCASE("exhaustive duality on a basis at N = 4")
    {
        const WaveGrid g4(4, two_pi);
        const CutoffLevel l4(2.0);
        const State x = random_state(g4, 2.0, 21);
        const State r = mhd_riesz(x, p, l4);
        const auto basis = solenoidal_basis(g4, l4);
        State rebuilt(g4);
        double worst = 0.0;
        for (const auto& phi : basis) {
            const double pairing = form_mhd(x, x, phi);
            worst = std::max(worst, std::abs(inner_h(r, phi) - pairing));
            rebuilt.axpy(pairing / inner_h(phi, phi), phi);
        }
        CHECK(worst <= 1e-9 * h_norm(r));
        CHECK(distance(rebuilt, r) <= 1e-9 * h_norm(r));
    }
    SUBCASE("rejects states outside H_n")
    {
        CHECK_THROWS_AS(mhd_riesz(random_state(g, 4.0, 1), p, CutoffLevel(2.0)), std::invalid_argument);
    }
}

TEST_CASE("Hall Riesz map")
{
    const WaveGrid g(8, two_pi);
    const CutoffLevel level(4.0);

    SUBCASE("duality and orthogonality")
    {
        const PhysParams p = unit_params(0.7);
        for (std::uint64_t seed = 30; seed < 35; ++seed) {
            const State x = random_state(g, 4.0, seed);
            const State r = hall_riesz(x, p, level);
            CHECK(norm(r.u) == 0.0);
            CHECK(within_cutoff(r, level));
            CHECK(std::abs(inner_h(r, x)) <= 1e-10 * h_norm(x) * h_norm(r));
            const State y = random_state(g, 4.0, seed + 100);
            CHECK(inner_h(r, y) == doctest::Approx(0.7 * form_thall(x, x, y)).epsilon(1e-9));
            CHECK(distance(hall_riesz(-2.0 * x, p, level), 4.0 * r) <= 1e-12 * h_norm(r));
        }
    }
    SUBCASE("vanishing cases")
    {
        const State x = random_state(g, 4.0, 40);
        CHECK(h_norm(hall_riesz(State(x.u, SpectralField(g)), unit_params(), level)) == 0.0);
        CHECK(h_norm(hall_riesz(x, unit_params(0.0), level)) == 0.0);
        // ABC field: curl B = B, so the Hall force vanishes.
        auto abc = [](double x, double y, double z) {
            return Vec{std::sin(z) + std::cos(y), std::sin(x) + std::cos(z), std::sin(y) + std::cos(x)};
        };
        const State beltrami(SpectralField(g), cutoff(field(g, abc), level));
        CHECK(h_norm(hall_riesz(beltrami, unit_params(), level)) <= 1e-12 * h_norm(beltrami));
    }
    SUBCASE("against hand-computed current")
    {
        const Analytic b = field_a();
        const State x(SpectralField(g), cutoff(field(g, b.f), level));
        const PhysParams p = unit_params(0.4);
        const SpectralField jxb =
            field(g, [&](double x0, double y0, double z0) { return cross3(curl_of(b.grad(x0, y0, z0)), b.f(x0, y0, z0)); });
        const SpectralField expect = 0.4 * cutoff(leray_project(curl(jxb)), level);
        const State r = hall_riesz(x, p, level);
        CHECK(distance(r.B, expect) <= 1e-12 * norm(expect));
    }
}

TEST_CASE("combined nonlinear terms match the separate maps")
{
    const WaveGrid g(8, two_pi);
    const CutoffLevel level(3.0);
    PhysParams p = unit_params(0.3);
    p.hartmann = 2.0;
    const State x = random_state(g, 3.0, 50);
    const NonlinearTerms nl = nonlinear_riesz(x, p, level);
    CHECK(distance(nl.mhd, mhd_riesz(x, p, level)) <= 1e-14 * h_norm(nl.mhd));
    CHECK(distance(nl.hall, hall_riesz(x, p, level)) <= 1e-14 * h_norm(nl.hall));
    double vmax = 0.0;
    const PhysicalField u = to_physical(x.u);
    for (std::size_t i = 0; i < g.size(); ++i)
        vmax = std::max(vmax, std::sqrt(std::pow(u.component(0)[i], 2) + std::pow(u.component(1)[i], 2) +
                                        std::pow(u.component(2)[i], 2)));
    // Padded grid samples a superset of points.
    CHECK(nl.max_speed >= vmax * (1.0 - 1e-12));

    // The Hartmann number multiplies (B.grad)B only.
    PhysParams q = p;
    q.hartmann = 1.0;
    const State only_b(SpectralField(g), x.B);
    CHECK(distance(mhd_riesz(only_b, p, level), 2.0 * mhd_riesz(only_b, q, level)) <=
          1e-12 * h_norm(mhd_riesz(only_b, p, level)));
}

TEST_CASE("dual norm and frozen boundedness constants")
{
    const WaveGrid g(8, two_pi);
    const CutoffLevel level(4.0);
    const State x = random_state(g, 4.0, 60);
    CHECK(dual_norm(x, 0.0) == doctest::Approx(h_norm(x)).epsilon(1e-14));

    State one(g);
    const Complex c(0.6, 0.8);
    one.B.at(1, g.flat(2, 0, 1)) = c;
    CHECK(dual_norm(one, -3.0) == doctest::Approx(std::abs(c) * std::pow(6.0, -1.5)));

    // Fitted once as the max over seeds 0..199 of the ratios, rounded up.
    const double c_mhd = 0.0045, c_hall = 0.0015;
    const PhysParams p = unit_params();
    for (std::uint64_t seed = 1000; seed < 1100; ++seed) {
        const State y = random_state(g, 4.0, seed);
        const double h = h_norm(y);
        CHECK(dual_norm(mhd_riesz(y, p, level), -3.0) <= c_mhd * h * h);
        CHECK(dual_norm(hall_riesz(y, p, level), -3.0) <= c_hall * h * v_norm(y));
    }
}
