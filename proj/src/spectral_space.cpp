#include "hallspde/spectral_space.hpp"

#include "fft.hpp"
#include "padded.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hallspde {
namespace {

constexpr Complex I{0.0, 1.0};

void require_same_grid(const WaveGrid& a, const WaveGrid& b, const char* what)
{
    if (!(a == b))
        throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

template <class Fn>
void for_each_mode(const WaveGrid& g, Fn&& fn)
{
    const int n = g.resolution();
    const auto k = g.axis_wavenumbers();
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l, ++idx)
                fn(idx, k[i], k[j], k[l], i == n / 2 || j == n / 2 || l == n / 2);
}

// Integer |k|^2 threshold for the ball |k| <= n, with ties kept inside.
double ball_bound(const WaveGrid& g, CutoffLevel level)
{
    const double r = level.radius() / g.unit();
    return r * r * (1.0 + 1e-12);
}

double integer_norm_sq(const WaveGrid& g, std::size_t flat)
{
    const auto w = g.integer_wavevector(flat);
    return double(w[0]) * w[0] + double(w[1]) * w[1] + double(w[2]) * w[2];
}

} // namespace

WaveGrid::WaveGrid(int resolution, double box_length)
    : n_(resolution), length_(box_length)
{
    if (resolution < 4 || resolution % 2 != 0)
        throw std::invalid_argument("grid: resolution N must be an even integer >= 4, got " +
                                    std::to_string(resolution));
    if (!(box_length > 0.0) || !std::isfinite(box_length))
        throw std::invalid_argument("grid: box length L must be positive");
    unit_ = 2.0 * std::numbers::pi / box_length;
    size_ = static_cast<std::size_t>(n_) * n_ * n_;
    auto axis = std::make_shared<std::vector<double>>(n_);
    for (int i = 0; i < n_; ++i)
        (*axis)[i] = unit_ * wavenumber(i);
    axis_ = std::move(axis);
}

std::array<int, 3> WaveGrid::indices(std::size_t flat) const
{
    const int l = static_cast<int>(flat % n_);
    const int j = static_cast<int>((flat / n_) % n_);
    const int i = static_cast<int>(flat / (static_cast<std::size_t>(n_) * n_));
    return {i, j, l};
}

std::array<int, 3> WaveGrid::integer_wavevector(std::size_t flat) const
{
    const auto [i, j, l] = indices(flat);
    return {wavenumber(i), wavenumber(j), wavenumber(l)};
}

std::array<double, 3> WaveGrid::wavevector(std::size_t flat) const
{
    const auto w = integer_wavevector(flat);
    return {unit_ * w[0], unit_ * w[1], unit_ * w[2]};
}

double WaveGrid::wavevector_norm_sq(std::size_t flat) const
{
    const auto k = wavevector(flat);
    return k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
}

bool WaveGrid::is_nyquist(std::size_t flat) const
{
    const auto [i, j, l] = indices(flat);
    return i == n_ / 2 || j == n_ / 2 || l == n_ / 2;
}

WaveGrid make_grid(int resolution, double box_length) { return WaveGrid(resolution, box_length); }

CutoffLevel::CutoffLevel(double radius) : radius_(radius)
{
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw std::invalid_argument("cutoff: level n must be positive");
}

SobolevIndex::SobolevIndex(double s) : s_(s)
{
    if (!(s >= 0.0) || !std::isfinite(s))
        throw std::invalid_argument("sobolev index must be non-negative");
}

PhysicalField::PhysicalField(const WaveGrid& g) : grid(g), values(3 * g.size(), 0.0) {}

PhysicalField::PhysicalField(const WaveGrid& g, std::vector<double> samples)
    : grid(g), values(std::move(samples))
{
    if (values.size() != 3 * grid.size())
        throw std::invalid_argument("physical field: expected " + std::to_string(3 * grid.size()) +
                                    " samples (N^3 x 3), got " + std::to_string(values.size()));
}

SpectralField::SpectralField(const WaveGrid& g) : grid_(g), coeffs_(3 * g.size()) {}

SpectralField& SpectralField::operator+=(const SpectralField& other)
{
    require_same_grid(grid_, other.grid_, "field +=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        coeffs_[i] += other.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other)
{
    require_same_grid(grid_, other.grid_, "field -=");
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        coeffs_[i] -= other.coeffs_[i];
    return *this;
}

SpectralField& SpectralField::operator*=(double factor)
{
    for (auto& c : coeffs_)
        c *= factor;
    return *this;
}

SpectralField& SpectralField::axpy(double factor, const SpectralField& other)
{
    require_same_grid(grid_, other.grid_, "field axpy");
    for (std::size_t i = 0; i < coeffs_.size(); ++i)
        coeffs_[i] += factor * other.coeffs_[i];
    return *this;
}

bool SpectralField::is_finite() const
{
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Complex& c) {
        return std::isfinite(c.real()) && std::isfinite(c.imag());
    });
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double factor, SpectralField a) { return a *= factor; }

State::State(SpectralField velocity, SpectralField magnetic)
    : u(std::move(velocity)), B(std::move(magnetic))
{
    require_same_grid(u.grid(), B.grid(), "state");
}

State& State::operator+=(const State& other)
{
    u += other.u;
    B += other.B;
    return *this;
}

State& State::operator-=(const State& other)
{
    u -= other.u;
    B -= other.B;
    return *this;
}

State& State::operator*=(double factor)
{
    u *= factor;
    B *= factor;
    return *this;
}

State& State::axpy(double factor, const State& other)
{
    u.axpy(factor, other.u);
    B.axpy(factor, other.B);
    return *this;
}

State operator+(State a, const State& b) { return a += b; }
State operator-(State a, const State& b) { return a -= b; }
State operator*(double factor, State a) { return a *= factor; }

SpectralField to_spectral(const PhysicalField& samples)
{
    const WaveGrid& g = samples.grid;
    if (samples.values.size() != 3 * g.size())
        throw std::invalid_argument("to_spectral: sample array must have shape N^3 x 3");
    SpectralField out(g);
    std::vector<Complex> buffer(g.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(g.size()));
    for (int c = 0; c < 3; ++c) {
        const auto src = samples.component(c);
        std::copy(src.begin(), src.end(), buffer.begin());
        auto dst = out.component(c);
        fft::forward(buffer, dst, g.resolution());
        for (auto& v : dst)
            v *= scale;
    }
    return out;
}

PhysicalField to_physical(const SpectralField& field)
{
    const WaveGrid& g = field.grid();
    PhysicalField out(g);
    std::vector<Complex> buffer(g.size());
    const double scale = 1.0 / std::sqrt(static_cast<double>(g.size()));
    for (int c = 0; c < 3; ++c) {
        fft::backward(field.component(c), buffer, g.resolution());
        auto dst = out.component(c);
        for (std::size_t i = 0; i < g.size(); ++i)
            dst[i] = scale * buffer[i].real();
    }
    return out;
}

SpectralField leray_project(const SpectralField& field)
{
    SpectralField out(field);
    auto ux = out.component(0), uy = out.component(1), uz = out.component(2);
    for_each_mode(field.grid(), [&](std::size_t m, double kx, double ky, double kz, bool nyquist) {
        if (nyquist) {
            ux[m] = uy[m] = uz[m] = 0.0;
            return;
        }
        const double k2 = kx * kx + ky * ky + kz * kz;
        if (k2 == 0.0)
            return;
        const Complex kdotu = (kx * ux[m] + ky * uy[m] + kz * uz[m]) / k2;
        ux[m] -= kx * kdotu;
        uy[m] -= ky * kdotu;
        uz[m] -= kz * kdotu;
    });
    return out;
}

SpectralField cutoff(const SpectralField& field, CutoffLevel level)
{
    const WaveGrid& g = field.grid();
    SpectralField out(field);
    const double bound = ball_bound(g, level);
    for (std::size_t m = 0; m < g.size(); ++m) {
        if (integer_norm_sq(g, m) > bound)
            for (int c = 0; c < 3; ++c)
                out.at(c, m) = 0.0;
    }
    return out;
}

State project_state(const State& state, CutoffLevel level)
{
    return State(cutoff(state.u, level), cutoff(state.B, level));
}

State project_solenoidal(const State& state, CutoffLevel level)
{
    return State(cutoff(leray_project(state.u), level), cutoff(leray_project(state.B), level));
}

double sobolev_norm(const SpectralField& field, SobolevIndex s)
{
    const WaveGrid& g = field.grid();
    double sum = 0.0;
    for (std::size_t m = 0; m < g.size(); ++m) {
        double mag = 0.0;
        for (int c = 0; c < 3; ++c)
            mag += std::norm(field.at(c, m));
        if (mag != 0.0)
            sum += std::pow(1.0 + g.wavevector_norm_sq(m), s.value()) * mag;
    }
    return std::sqrt(sum);
}

double inner_l2(const SpectralField& f, const SpectralField& g)
{
    require_same_grid(f.grid(), g.grid(), "inner_l2");
    const auto a = f.coefficients();
    const auto b = g.coefficients();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return sum;
}

double inner_h(const State& a, const State& b) { return inner_l2(a.u, b.u) + inner_l2(a.B, b.B); }

double h_norm(const State& s) { return std::sqrt(inner_h(s, s)); }

namespace {

double gradient_pairing(const SpectralField& f, const SpectralField& g)
{
    require_same_grid(f.grid(), g.grid(), "dirichlet_form");
    const WaveGrid& grid = f.grid();
    double sum = 0.0;
    for (std::size_t m = 0; m < grid.size(); ++m) {
        const double k2 = grid.wavevector_norm_sq(m);
        if (k2 == 0.0)
            continue;
        double dot = 0.0;
        for (int c = 0; c < 3; ++c) {
            const Complex a = f.at(c, m), b = g.at(c, m);
            dot += a.real() * b.real() + a.imag() * b.imag();
        }
        sum += k2 * dot;
    }
    return sum;
}

} // namespace

double dirichlet_form(const State& a, const State& b, double nu1, double nu2)
{
    return nu1 * gradient_pairing(a.u, b.u) + nu2 * gradient_pairing(a.B, b.B);
}

SpectralField curl(const SpectralField& field)
{
    SpectralField out(field.grid());
    const auto ux = field.component(0), uy = field.component(1), uz = field.component(2);
    auto wx = out.component(0), wy = out.component(1), wz = out.component(2);
    for_each_mode(field.grid(), [&](std::size_t m, double kx, double ky, double kz, bool nyquist) {
        if (nyquist)
            return;
        wx[m] = I * (ky * uz[m] - kz * uy[m]);
        wy[m] = I * (kz * ux[m] - kx * uz[m]);
        wz[m] = I * (kx * uy[m] - ky * ux[m]);
    });
    return out;
}

ScalarSpectrum divergence(const SpectralField& field)
{
    ScalarSpectrum out(field.grid().size());
    const auto ux = field.component(0), uy = field.component(1), uz = field.component(2);
    for_each_mode(field.grid(), [&](std::size_t m, double kx, double ky, double kz, bool nyquist) {
        if (!nyquist)
            out[m] = I * (kx * ux[m] + ky * uy[m] + kz * uz[m]);
    });
    return out;
}

SpectralField gradient(std::span<const Complex> scalar, const WaveGrid& grid)
{
    if (scalar.size() != grid.size())
        throw std::invalid_argument("gradient: scalar spectrum size mismatch");
    SpectralField out(grid);
    auto gx = out.component(0), gy = out.component(1), gz = out.component(2);
    for_each_mode(grid, [&](std::size_t m, double kx, double ky, double kz, bool nyquist) {
        if (nyquist)
            return;
        gx[m] = I * kx * scalar[m];
        gy[m] = I * ky * scalar[m];
        gz[m] = I * kz * scalar[m];
    });
    return out;
}

SpectralField cross(const SpectralField& a, const SpectralField& b)
{
    require_same_grid(a.grid(), b.grid(), "cross");
    detail::PaddedTransform t(a.grid());
    const std::size_t np = t.physical_size();
    std::vector<double> pa(3 * np), pb(3 * np), pc(np);
    for (int c = 0; c < 3; ++c) {
        t.to_physical(a.component(c), std::span(pa).subspan(c * np, np));
        t.to_physical(b.component(c), std::span(pb).subspan(c * np, np));
    }
    SpectralField out(a.grid());
    for (int c = 0; c < 3; ++c) {
        const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
        for (std::size_t x = 0; x < np; ++x)
            pc[x] = pa[c1 * np + x] * pb[c2 * np + x] - pa[c2 * np + x] * pb[c1 * np + x];
        t.to_spectral(pc, out.component(c));
    }
    return out;
}

double relative_divergence(const SpectralField& field)
{
    const double norm = std::sqrt(inner_l2(field, field));
    if (norm == 0.0)
        return 0.0;
    double worst = 0.0;
    for (const auto& d : divergence(field))
        worst = std::max(worst, std::abs(d));
    return worst / norm;
}

bool within_cutoff(const SpectralField& field, CutoffLevel level)
{
    const WaveGrid& g = field.grid();
    const double bound = ball_bound(g, level);
    for (std::size_t m = 0; m < g.size(); ++m) {
        if (integer_norm_sq(g, m) <= bound)
            continue;
        for (int c = 0; c < 3; ++c)
            if (field.at(c, m) != Complex{})
                return false;
    }
    return true;
}

bool within_cutoff(const State& state, CutoffLevel level)
{
    return within_cutoff(state.u, level) && within_cutoff(state.B, level);
}

std::pair<double, double> check_embedding_bound(const State& state, double m1, double m2, CutoffLevel level)
{
    if (!within_cutoff(state, level))
        throw std::invalid_argument("check_embedding_bound: state is not in H_n");
    const double hu = sobolev_norm(state.u, SobolevIndex(m1));
    const double hb = sobolev_norm(state.B, SobolevIndex(m2));
    const double lhs = hu * hu + hb * hb;
    const double n = level.radius();
    const double rhs = std::pow(1.0 + n * n, std::max(m1, m2)) * inner_h(state, state);
    return {lhs, rhs};
}

namespace detail {

PaddedTransform::PaddedTransform(const WaveGrid& grid)
    : grid_(grid), m_(3 * grid.resolution() / 2), half_(fft::half_size(3 * grid.resolution() / 2))
{
    const double n3 = static_cast<double>(grid.size());
    const double m3 = static_cast<double>(m_) * m_ * m_;
    to_physical_scale_ = 1.0 / std::sqrt(n3);
    to_spectral_scale_ = std::sqrt(n3) / m3;

    const int mh = m_ / 2 + 1;
    auto wrap = [this](int k) { return k >= 0 ? k : k + m_; };
    links_.reserve(grid.size());
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        if (grid.is_nyquist(idx))
            continue;
        auto [kx, ky, kz] = grid.integer_wavevector(idx);
        bool conj = false;
        if (kz < 0) {
            kx = -kx;
            ky = -ky;
            kz = -kz;
            conj = true;
        }
        const std::size_t half = (static_cast<std::size_t>(wrap(kx)) * m_ + wrap(ky)) * mh + kz;
        links_.push_back({idx, half, conj});
    }
}

void PaddedTransform::to_physical(std::span<const Complex> component, std::span<double> out)
{
    std::fill(half_.begin(), half_.end(), Complex{});
    for (const auto& link : links_)
        if (!link.conjugate)
            half_[link.half_index] = to_physical_scale_ * component[link.grid_index];
    fft::real_backward(half_, out, m_);
}

void PaddedTransform::to_spectral(std::span<const double> values, std::span<Complex> component)
{
    fft::real_forward(values, half_, m_);
    std::fill(component.begin(), component.end(), Complex{});
    for (const auto& link : links_) {
        const Complex v = to_spectral_scale_ * half_[link.half_index];
        component[link.grid_index] = link.conjugate ? std::conj(v) : v;
    }
}

} // namespace detail
} // namespace hallspde
