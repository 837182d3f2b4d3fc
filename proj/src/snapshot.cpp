#include "hallspde/snapshot.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace hallspde {
namespace {

constexpr std::array<char, 4> magic{'H', 'M', 'H', 'D'};

template <class T>
void put_le(std::ostream& out, T value)
{
    static_assert(sizeof(T) == 4 || sizeof(T) == 8);
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    const U bits = std::bit_cast<U>(value);
    std::array<char, sizeof(T)> bytes;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(std::istream& in)
{
    using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
    std::array<unsigned char, sizeof(T)> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size()))
        throw std::runtime_error("snapshot: truncated stream");
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        bits |= static_cast<U>(bytes[i]) << (8 * i);
    return std::bit_cast<T>(bits);
}

void put_header(std::ostream& out, const WaveGrid& g, std::uint32_t components)
{
    out.write(magic.data(), magic.size());
    put_le(out, snapshot_version);
    put_le(out, static_cast<std::uint32_t>(g.resolution()));
    put_le(out, g.box_length());
    put_le(out, components);
}

void put_field(std::ostream& out, const SpectralField& f)
{
    for (const auto& c : f.coefficients()) {
        put_le(out, c.real());
        put_le(out, c.imag());
    }
}

void get_field(std::istream& in, SpectralField& f)
{
    for (auto& c : f.coefficients()) {
        const double re = get_le<double>(in);
        const double im = get_le<double>(in);
        c = {re, im};
    }
}

} // namespace

void write_snapshot(std::ostream& out, const SpectralField& field)
{
    put_header(out, field.grid(), 3);
    put_field(out, field);
}

void write_snapshot(std::ostream& out, const State& state)
{
    put_header(out, state.grid(), 6);
    put_field(out, state.u);
    put_field(out, state.B);
}

void write_snapshot(const std::filesystem::path& path, const State& state)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("snapshot: cannot open " + path.string());
    write_snapshot(out, state);
}

std::variant<SpectralField, State> read_snapshot(std::istream& in)
{
    std::array<char, 4> head{};
    if (!in.read(head.data(), head.size()) || head != magic)
        throw std::runtime_error("snapshot: bad magic");
    const auto version = get_le<std::uint32_t>(in);
    if (version != snapshot_version)
        throw std::runtime_error("snapshot: unsupported version " + std::to_string(version));
    const auto n = get_le<std::uint32_t>(in);
    const auto length = get_le<double>(in);
    const auto components = get_le<std::uint32_t>(in);
    const WaveGrid grid(static_cast<int>(n), length);
    if (components == 3) {
        SpectralField f(grid);
        get_field(in, f);
        return f;
    }
    if (components == 6) {
        State s(grid);
        get_field(in, s.u);
        get_field(in, s.B);
        return s;
    }
    throw std::runtime_error("snapshot: component count must be 3 or 6");
}

std::variant<SpectralField, State> read_snapshot(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("snapshot: cannot open " + path.string());
    return read_snapshot(in);
}

} // namespace hallspde
