#pragma once

#include "hallspde/spectral_space.hpp"

#include <span>
#include <vector>

namespace hallspde::detail {

/// Moves band-limited components between the N-grid spectrum and physical
/// values on a 3N/2 grid. Products of two such fields formed pointwise on the
/// padded grid carry no aliasing back onto the non-Nyquist N-grid modes.
/// Holds scratch storage; use one instance per thread.
class PaddedTransform {
public:
    explicit PaddedTransform(const WaveGrid& grid);

    int padded_resolution() const { return m_; }
    std::size_t physical_size() const { return static_cast<std::size_t>(m_) * m_ * m_; }

    void to_physical(std::span<const Complex> component, std::span<double> out);
    void to_spectral(std::span<const double> values, std::span<Complex> component);

private:
    struct Link {
        std::size_t grid_index;
        std::size_t half_index;
        bool conjugate;
    };

    WaveGrid grid_;
    int m_;
    double to_physical_scale_;
    double to_spectral_scale_;
    std::vector<Link> links_;
    std::vector<Complex> half_;
};

} // namespace hallspde::detail
