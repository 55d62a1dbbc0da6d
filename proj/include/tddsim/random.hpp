#ifndef TDDSIM_RANDOM_HPP
#define TDDSIM_RANDOM_HPP

#include <complex>
#include <cstdint>
#include <cmath>
#include <initializer_list>
#include <numbers>
#include <random>

namespace tddsim {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used as the seed-splitting function for every
/// derived stream, so streams keyed by different tags never share state.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a base seed and an ordered list of tags.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept
{
    std::uint64_t s = splitmix64(base);
    for (std::uint64_t t : tags) {
        s = splitmix64(s ^ splitmix64(t + 0x632be59bd9b4e019ULL));
    }
    return s;
}

// Stream tags.
enum class Stream : std::uint64_t {
    Topology = 1,
    Arrivals = 2,
    Fading = 3,
    Decoding = 4,
    Replication = 5,
};

inline Rng make_stream(std::uint64_t seed, Stream tag, std::uint64_t index = 0)
{
    return Rng(derive_seed(seed, {static_cast<std::uint64_t>(tag), index}));
}

/// Uniform double in (0, 1].
inline double uniform_open0(Rng& rng) noexcept
{
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
/// One Box-Muller transform yields both quadratures.
inline std::complex<double> complex_gaussian(Rng& rng, double variance = 1.0)
{
    const double r = std::sqrt(-variance * std::log(uniform_open0(rng)));
    const double phase = 2.0 * std::numbers::pi * uniform_open0(rng);
    return std::polar(r, phase);
}

inline double standard_normal(Rng& rng)
{
    const double r = std::sqrt(-2.0 * std::log(uniform_open0(rng)));
    return r * std::cos(2.0 * std::numbers::pi * uniform_open0(rng));
}

inline double exponential(Rng& rng, double rate)
{
    return -std::log(uniform_open0(rng)) / rate;
}

} // namespace tddsim

#endif // TDDSIM_RANDOM_HPP
