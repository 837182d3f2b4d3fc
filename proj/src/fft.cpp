#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace hallspde::fft {
namespace {

enum class Kind { forward, backward, real_forward, real_backward };

// Planner calls are not thread-safe in FFTW; execution with the new-array
// interface is. Plans are created once per (size, kind) and never destroyed.
fftw_plan plan_for(int n, Kind kind)
{
    static std::mutex mutex;
    static std::map<std::pair<int, Kind>, fftw_plan> plans;

    std::lock_guard lock(mutex);
    auto key = std::make_pair(n, kind);
    if (auto it = plans.find(key); it != plans.end())
        return it->second;

    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    const std::size_t full = static_cast<std::size_t>(n) * n * n;
    fftw_plan plan = nullptr;
    switch (kind) {
    case Kind::forward:
    case Kind::backward: {
        std::vector<fftw_complex> a(full), b(full);
        plan = fftw_plan_dft_3d(n, n, n, a.data(), b.data(),
                                kind == Kind::forward ? FFTW_FORWARD : FFTW_BACKWARD, flags);
        break;
    }
    case Kind::real_forward: {
        std::vector<double> a(full);
        std::vector<fftw_complex> b(half_size(n));
        plan = fftw_plan_dft_r2c_3d(n, n, n, a.data(), b.data(), flags);
        break;
    }
    case Kind::real_backward: {
        std::vector<fftw_complex> a(half_size(n));
        std::vector<double> b(full);
        plan = fftw_plan_dft_c2r_3d(n, n, n, a.data(), b.data(), flags);
        break;
    }
    }
    if (plan == nullptr)
        throw std::runtime_error("fftw: failed to create plan");
    plans.emplace(key, plan);
    return plan;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const std::complex<double>* p)
{
    return reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(p));
}

} // namespace

void forward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, int n)
{
    fftw_execute_dft(plan_for(n, Kind::forward), as_fftw(in.data()), as_fftw(out.data()));
}

void backward(std::span<const std::complex<double>> in, std::span<std::complex<double>> out, int n)
{
    fftw_execute_dft(plan_for(n, Kind::backward), as_fftw(in.data()), as_fftw(out.data()));
}

void real_forward(std::span<const double> in, std::span<std::complex<double>> out, int n)
{
    fftw_execute_dft_r2c(plan_for(n, Kind::real_forward), const_cast<double*>(in.data()),
                         as_fftw(out.data()));
}

void real_backward(std::span<std::complex<double>> in, std::span<double> out, int n)
{
    fftw_execute_dft_c2r(plan_for(n, Kind::real_backward), as_fftw(in.data()), out.data());
}

} // namespace hallspde::fft
