#pragma once
#include <cmath>
#include <complex>
#include <cstdint>

namespace innerdyn {

// SplitMix64. Tiny state, full-period, and the stream depends only on the
// seed bits, so reports built from it are reproducible byte for byte.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed = 0x9E3779B97F4A7C15ull) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53 usable bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double angle() { return 6.283185307179586476925286766559 * uniform(); }

    std::complex<double> unit_vector() {
        const double t = angle();
        return {std::cos(t), std::sin(t)};
    }

    // Uniform w.r.t. area in the disk of given radius about the origin.
    std::complex<double> in_disk(double radius = 1.0) {
        const double r = radius * std::sqrt(uniform());
        return r * unit_vector();
    }
};

// Counter-based sub-seed: walk/task number `index` under master `seed` gets
// its own stream, so parallel shards merged by index reproduce the serial run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    SplitMix64 g(seed ^ (0xA0761D6478BD642Full * (index + 1)));
    g.next();
    return g.next();
}

} // namespace innerdyn
