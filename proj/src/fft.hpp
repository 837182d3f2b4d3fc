#pragma once

#include <complex>
#include <span>

namespace hallspde::fft {

// Unnormalized 3-D transforms on an n^3 cube. Forward uses e^{-ik.x}.
// Half spectra have shape n x n x (n/2 + 1).

void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, int n);
void backward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, int n);

void real_forward(std::span<const double> in, std::span<std::complex<double>> out, int n);
/// Overwrites `in`.
void real_backward(std::span<std::complex<double>> in, std::span<double> out, int n);

inline std::size_t half_size(int n)
{
    return static_cast<std::size_t>(n) * n * (n / 2 + 1);
}

} // namespace hallspde::fft
