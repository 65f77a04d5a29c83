#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lattwave {

using cplx = std::complex<double>;

// Deterministic RNG: splitmix64 bit stream with the variate transforms
// implemented here, because std::normal_distribution is
// implementation-defined and would break byte-stable outputs across
// standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        // splitmix64; small, seedable, and identical everywhere.
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // standard normal via Box-Muller (always computes a fresh pair's first
    // member; slightly wasteful, entirely stateless between calls)
    double normal() {
        double u1 = uniform(), u2 = uniform();
        while (u1 == 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    cplx cnormal() {
        double u1 = uniform(), u2 = uniform();
        while (u1 == 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

  private:
    std::uint64_t state_;
};

// FNV-1a over a byte string; used to fingerprint configs in output files.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string format_g17(double x);           // shortest exact round-trip "%.17g"
std::string hex_u64(std::uint64_t v);

} // namespace lattwave
