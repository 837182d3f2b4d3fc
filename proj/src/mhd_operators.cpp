#include "hallspde/mhd_operators.hpp"

#include "padded.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hallspde {
namespace {

constexpr Complex I{0.0, 1.0};

using Buffers = std::vector<std::vector<double>>;

void require_in_level(const State& state, CutoffLevel level, const char* what)
{
    if (!within_cutoff(state, level))
        throw std::invalid_argument(std::string(what) + ": state is not in H_n (modes beyond the cutoff)");
}

// Physical values of the three components of `f` on the padded grid.
Buffers padded_values(detail::PaddedTransform& t, const SpectralField& f)
{
    Buffers out(3, std::vector<double>(t.physical_size()));
    for (int c = 0; c < 3; ++c)
        t.to_physical(f.component(c), out[c]);
    return out;
}

// grad[a * 3 + b] = d_b f_a on the padded grid.
Buffers padded_gradient(detail::PaddedTransform& t, const SpectralField& f)
{
    const WaveGrid& g = f.grid();
    const auto k = g.axis_wavenumbers();
    const int n = g.resolution();
    Buffers out(9, std::vector<double>(t.physical_size()));
    std::vector<Complex> tmp(g.size());
    for (int a = 0; a < 3; ++a) {
        const auto src = f.component(a);
        for (int b = 0; b < 3; ++b) {
            std::size_t idx = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < n; ++l, ++idx) {
                        const int axis_index = b == 0 ? i : (b == 1 ? j : l);
                        tmp[idx] = I * k[axis_index] * src[idx];
                    }
            t.to_physical(tmp, out[a * 3 + b]);
        }
    }
    return out;
}

// (u . grad) w on the padded grid, accumulated with weight into `acc`.
void add_advection(const Buffers& u, const Buffers& grad_w, double weight, Buffers& acc)
{
    const std::size_t np = acc[0].size();
    for (int a = 0; a < 3; ++a)
        for (std::size_t x = 0; x < np; ++x)
            acc[a][x] += weight * (u[0][x] * grad_w[a * 3 + 0][x] + u[1][x] * grad_w[a * 3 + 1][x] +
                                   u[2][x] * grad_w[a * 3 + 2][x]);
}

SpectralField back_to_spectral(detail::PaddedTransform& t, const Buffers& values, const WaveGrid& g)
{
    SpectralField out(g);
    for (int c = 0; c < 3; ++c)
        t.to_spectral(values[c], out.component(c));
    return out;
}

SpectralField advection(const SpectralField& u, const SpectralField& w)
{
    detail::PaddedTransform t(u.grid());
    const Buffers pu = padded_values(t, u);
    const Buffers gw = padded_gradient(t, w);
    Buffers acc(3, std::vector<double>(t.physical_size(), 0.0));
    add_advection(pu, gw, 1.0, acc);
    return back_to_spectral(t, acc, u.grid());
}

SpectralField solenoidal_cut(const SpectralField& f, CutoffLevel level)
{
    return cutoff(leray_project(f), level);
}

} // namespace

void PhysParams::validate() const
{
    if (!(nu1 > 0.0))
        throw std::invalid_argument("physics: nu1 must be positive");
    if (!(nu2 > 0.0))
        throw std::invalid_argument("physics: nu2 must be positive");
    if (!(hartmann > 0.0))
        throw std::invalid_argument("physics: hartmann must be positive");
    if (!(hall >= 0.0))
        throw std::invalid_argument("physics: hall must be non-negative");
}

State stokes_riesz(const State& state, const PhysParams& params, CutoffLevel level)
{
    require_in_level(state, level, "stokes_riesz");
    const WaveGrid& g = state.grid();
    State out(state);
    for (std::size_t m = 0; m < g.size(); ++m) {
        const double k2 = g.wavevector_norm_sq(m);
        for (int c = 0; c < 3; ++c) {
            out.u.at(c, m) *= params.nu1 * k2;
            out.B.at(c, m) *= params.nu2 * k2;
        }
    }
    return out;
}

State stokes_propagate(const State& state, const PhysParams& params, double dt)
{
    const WaveGrid& g = state.grid();
    State out(state);
    for (std::size_t m = 0; m < g.size(); ++m) {
        const double k2 = g.wavevector_norm_sq(m);
        if (k2 == 0.0)
            continue;
        const double fu = std::exp(-params.nu1 * k2 * dt);
        const double fb = std::exp(-params.nu2 * k2 * dt);
        for (int c = 0; c < 3; ++c) {
            out.u.at(c, m) *= fu;
            out.B.at(c, m) *= fb;
        }
    }
    return out;
}

double trilinear_b(const SpectralField& u, const SpectralField& w, const SpectralField& v)
{
    if (!(u.grid() == w.grid()) || !(u.grid() == v.grid()))
        throw std::invalid_argument("trilinear_b: grid mismatch");
    return inner_l2(advection(u, w), v);
}

double form_mhd(const State& phi1, const State& phi2, const State& phi3)
{
    return trilinear_b(phi1.u, phi2.u, phi3.u) - trilinear_b(phi1.B, phi2.B, phi3.u) +
           trilinear_b(phi1.u, phi2.B, phi3.B) - trilinear_b(phi1.B, phi2.u, phi3.B);
}

double form_hall(const SpectralField& u, const SpectralField& w, const SpectralField& v)
{
    if (!(u.grid() == w.grid()) || !(u.grid() == v.grid()))
        throw std::invalid_argument("form_hall: grid mismatch");
    return -inner_l2(cross(u, curl(w)), curl(v));
}

double form_thall(const State& phi1, const State& phi2, const State& phi3)
{
    return form_hall(phi1.B, phi2.B, phi3.B);
}

NonlinearTerms nonlinear_riesz(const State& state, const PhysParams& params, CutoffLevel level)
{
    require_in_level(state, level, "nonlinear_riesz");
    const WaveGrid& g = state.grid();
    detail::PaddedTransform t(g);
    const std::size_t np = t.physical_size();

    // Flux form: for solenoidal u, B the advection terms are div(u u - s B B)
    // and curl(B x u), which needs 21 padded transforms instead of 36.
    const Buffers pu = padded_values(t, state.u);
    const Buffers pb = padded_values(t, state.B);

    const auto k = g.axis_wavenumbers();
    const int n = g.resolution();
    SpectralField mhd_u(g);
    std::vector<double> prod(np);
    std::vector<Complex> hat(g.size());
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b) {
            for (std::size_t x = 0; x < np; ++x)
                prod[x] = pu[a][x] * pu[b][x] - params.hartmann * pb[a][x] * pb[b][x];
            t.to_spectral(prod, hat);
            // Row a gets d_b S_ab, row b gets d_a S_ab (once on the diagonal).
            std::size_t idx = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int l = 0; l < n; ++l, ++idx) {
                        const std::array<double, 3> kv{k[i], k[j], k[l]};
                        mhd_u.at(a, idx) += I * kv[b] * hat[idx];
                        if (b != a)
                            mhd_u.at(b, idx) += I * kv[a] * hat[idx];
                    }
        }

    Buffers e(3, std::vector<double>(np));
    for (int c = 0; c < 3; ++c) {
        const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
        for (std::size_t x = 0; x < np; ++x)
            e[c][x] = pb[c1][x] * pu[c2][x] - pb[c2][x] * pu[c1][x];
    }
    const SpectralField mhd_b = curl(back_to_spectral(t, e, g));

    double speed_sq = 0.0;
    for (std::size_t x = 0; x < np; ++x)
        speed_sq = std::max(speed_sq, pu[0][x] * pu[0][x] + pu[1][x] * pu[1][x] + pu[2][x] * pu[2][x]);

    NonlinearTerms out{State(solenoidal_cut(mhd_u, level), solenoidal_cut(mhd_b, level)), State(g),
                       std::sqrt(speed_sq)};

    if (params.hall != 0.0) {
        const Buffers pj = padded_values(t, curl(state.B));
        for (int c = 0; c < 3; ++c) {
            const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
            for (std::size_t x = 0; x < np; ++x)
                e[c][x] = pj[c1][x] * pb[c2][x] - pj[c2][x] * pb[c1][x];
        }
        SpectralField hall = curl(back_to_spectral(t, e, g));
        hall *= params.hall;
        out.hall.B = solenoidal_cut(hall, level);
    }
    return out;
}

State mhd_riesz(const State& state, const PhysParams& params, CutoffLevel level)
{
    PhysParams mhd_only = params;
    mhd_only.hall = 0.0;
    return nonlinear_riesz(state, mhd_only, level).mhd;
}

State hall_riesz(const State& state, const PhysParams& params, CutoffLevel level)
{
    require_in_level(state, level, "hall_riesz");
    const WaveGrid& g = state.grid();
    State out(g);
    if (params.hall == 0.0)
        return out;
    SpectralField hall = curl(cross(curl(state.B), state.B));
    hall *= params.hall;
    out.B = solenoidal_cut(hall, level);
    return out;
}

double dual_norm(const State& state, double s)
{
    const WaveGrid& g = state.grid();
    double sum = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m) {
        double mag = 0.0;
        for (int c = 0; c < 3; ++c)
            mag += std::norm(state.u.at(c, m)) + std::norm(state.B.at(c, m));
        if (mag != 0.0)
            sum += std::pow(1.0 + g.wavevector_norm_sq(m), s) * mag;
    }
    return std::sqrt(sum);
}

} // namespace hallspde
