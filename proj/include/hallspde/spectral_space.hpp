#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace hallspde {

using Complex = std::complex<double>;

/// Periodic box [0, L)^3 with N samples per axis.
///
/// Spectral arrays are stored in FFT order: index i in [0, N) carries the
/// integer wavenumber i for i < N/2 and i - N otherwise, so every axis covers
/// [-N/2, N/2 - 1]. The physical wavevector is (2*pi/L) times that triple.
/// Flat index is row-major: (i * N + j) * N + l.
class WaveGrid {
public:
    WaveGrid(int resolution, double box_length);

    int resolution() const { return n_; }
    double box_length() const { return length_; }
    /// Number of wavevectors (= N^3).
    std::size_t size() const { return size_; }
    /// Wavenumber quantum 2*pi/L.
    double unit() const { return unit_; }

    int wavenumber(int index) const { return index < n_ / 2 ? index : index - n_; }
    int index_of(int wavenumber) const { return wavenumber >= 0 ? wavenumber : wavenumber + n_; }
    std::size_t flat(int i, int j, int l) const
    {
        return (static_cast<std::size_t>(i) * n_ + j) * n_ + l;
    }
    std::array<int, 3> indices(std::size_t flat) const;
    std::array<int, 3> integer_wavevector(std::size_t flat) const;
    std::array<double, 3> wavevector(std::size_t flat) const;
    double wavevector_norm_sq(std::size_t flat) const;
    /// True when some component sits on the unpaired -N/2 plane.
    bool is_nyquist(std::size_t flat) const;
    /// Largest cutoff radius the grid can honour: N/2 * 2*pi/L.
    double max_cutoff() const { return 0.5 * n_ * unit_; }

    /// Per-axis physical wavenumbers in FFT order.
    std::span<const double> axis_wavenumbers() const { return *axis_; }

    friend bool operator==(const WaveGrid& a, const WaveGrid& b)
    {
        return a.n_ == b.n_ && a.length_ == b.length_;
    }

private:
    int n_;
    double length_;
    double unit_;
    std::size_t size_;
    std::shared_ptr<const std::vector<double>> axis_;
};

WaveGrid make_grid(int resolution, double box_length);

/// Radius n of the truncation ball |k| <= n (wavevector units).
class CutoffLevel {
public:
    explicit CutoffLevel(double radius);
    double radius() const { return radius_; }

private:
    double radius_;
};

/// Sobolev exponent s >= 0.
class SobolevIndex {
public:
    explicit SobolevIndex(double s);
    double value() const { return s_; }

private:
    double s_;
};

/// Real vector field on the grid, three components stored back to back.
struct PhysicalField {
    explicit PhysicalField(const WaveGrid& g);
    PhysicalField(const WaveGrid& g, std::vector<double> samples);

    std::span<double> component(int c) { return {values.data() + c * grid.size(), grid.size()}; }
    std::span<const double> component(int c) const
    {
        return {values.data() + c * grid.size(), grid.size()};
    }

    WaveGrid grid;
    std::vector<double> values;
};

/// Fourier coefficients of a real 3-vector field (unitary normalization).
class SpectralField {
public:
    explicit SpectralField(const WaveGrid& g);

    const WaveGrid& grid() const { return grid_; }
    std::span<Complex> component(int c) { return {coeffs_.data() + c * grid_.size(), grid_.size()}; }
    std::span<const Complex> component(int c) const
    {
        return {coeffs_.data() + c * grid_.size(), grid_.size()};
    }
    std::span<Complex> coefficients() { return coeffs_; }
    std::span<const Complex> coefficients() const { return coeffs_; }

    Complex& at(int c, std::size_t flat) { return coeffs_[c * grid_.size() + flat]; }
    const Complex& at(int c, std::size_t flat) const { return coeffs_[c * grid_.size() + flat]; }

    SpectralField& operator+=(const SpectralField& other);
    SpectralField& operator-=(const SpectralField& other);
    SpectralField& operator*=(double factor);
    /// this += factor * other
    SpectralField& axpy(double factor, const SpectralField& other);

    bool is_finite() const;

    friend bool operator==(const SpectralField& a, const SpectralField& b)
    {
        return a.grid_ == b.grid_ && a.coeffs_ == b.coeffs_;
    }

private:
    WaveGrid grid_;
    std::vector<Complex> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double factor, SpectralField a);

/// Scalar spectrum (divergence output), FFT order.
using ScalarSpectrum = std::vector<Complex>;

/// Element (u, B) of the product space.
struct State {
    explicit State(const WaveGrid& g) : u(g), B(g) {}
    State(SpectralField velocity, SpectralField magnetic);

    const WaveGrid& grid() const { return u.grid(); }

    State& operator+=(const State& other);
    State& operator-=(const State& other);
    State& operator*=(double factor);
    State& axpy(double factor, const State& other);

    bool is_finite() const { return u.is_finite() && B.is_finite(); }

    friend bool operator==(const State& a, const State& b) { return a.u == b.u && a.B == b.B; }

    SpectralField u;
    SpectralField B;
};

State operator+(State a, const State& b);
State operator-(State a, const State& b);
State operator*(double factor, State a);

// Transforms. The forward map is X(k) = N^{-3/2} sum_x x e^{-ik.x}, so the
// physical inner product sum_x f(x) g(x) equals sum_k F(k) conj(G(k)).
SpectralField to_spectral(const PhysicalField& samples);
PhysicalField to_physical(const SpectralField& field);

/// Mode-wise transverse projection. Nyquist planes are mapped to zero.
SpectralField leray_project(const SpectralField& field);
/// Zeroes every coefficient with |k| > n. Ties stay inside the ball.
SpectralField cutoff(const SpectralField& field, CutoffLevel level);
State project_state(const State& state, CutoffLevel level);
/// Leray projection followed by the cutoff, applied to both components.
State project_solenoidal(const State& state, CutoffLevel level);

double sobolev_norm(const SpectralField& field, SobolevIndex s);
/// Real part of sum_k F(k) . conj(G(k)).
double inner_l2(const SpectralField& f, const SpectralField& g);
double inner_h(const State& a, const State& b);
/// nu1 <grad u, grad v> + nu2 <grad B, grad C>.
double dirichlet_form(const State& a, const State& b, double nu1, double nu2);
double h_norm(const State& s);

SpectralField curl(const SpectralField& field);
ScalarSpectrum divergence(const SpectralField& field);
/// i k psi(k); helper for building pure gradient fields.
SpectralField gradient(std::span<const Complex> scalar, const WaveGrid& grid);
/// Pointwise cross product evaluated on the 3/2-padded grid.
SpectralField cross(const SpectralField& a, const SpectralField& b);

/// max_k |k . F(k)| relative to the L2 norm of F (0 for the zero field).
double relative_divergence(const SpectralField& field);
/// True if every coefficient outside |k| <= n is exactly zero.
bool within_cutoff(const SpectralField& field, CutoffLevel level);
bool within_cutoff(const State& state, CutoffLevel level);

/// Returns (||u||^2_{m1,m2}, (1+n^2)^max(m1,m2) |u|^2) for u in H_n.
std::pair<double, double> check_embedding_bound(const State& state, double m1, double m2, CutoffLevel level);

} // namespace hallspde
