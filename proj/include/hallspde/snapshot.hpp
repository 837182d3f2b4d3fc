#pragma once

#include "hallspde/spectral_space.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <variant>

namespace hallspde {

/// Binary field snapshot, little-endian throughout:
///   "HMHD" | u32 version | u32 N | f64 L | u32 component count (3 or 6)
///   | (f64 re, f64 im) per coefficient, component-major, row-major FFT k-order,
///   u block before B block.
inline constexpr std::uint32_t snapshot_version = 1;

void write_snapshot(std::ostream& out, const SpectralField& field);
void write_snapshot(std::ostream& out, const State& state);
void write_snapshot(const std::filesystem::path& path, const State& state);

/// A 3-component snapshot yields a SpectralField, a 6-component one a State.
std::variant<SpectralField, State> read_snapshot(std::istream& in);
std::variant<SpectralField, State> read_snapshot(const std::filesystem::path& path);

} // namespace hallspde
