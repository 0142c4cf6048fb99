#pragma once
#include <cmath>
#include <complex>

namespace innerdyn {

using Complex = std::complex<double>;

// Finite values are kept below this modulus; anything beyond collapses to
// the point at infinity.
inline constexpr double kOverflowGuard = 1e300;

inline bool finite_number(Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// A point of the Riemann sphere.
struct ExtendedComplex {
    Complex value{0.0, 0.0};
    bool infinite = false;

    static ExtendedComplex infinity() { return {Complex{}, true}; }

    static ExtendedComplex of(Complex z) {
        if (!finite_number(z) || std::abs(z) > kOverflowGuard) return infinity();
        return {z, false};
    }
};

inline bool is_infinity(const ExtendedComplex& z) { return z.infinite; }

// Chordal metric on the sphere, range [0, 2]. Handy for "did the orbit
// escape" style comparisons where both arguments may be infinite.
inline double chordal_distance(const ExtendedComplex& a, const ExtendedComplex& b) {
    if (a.infinite && b.infinite) return 0.0;
    if (a.infinite || b.infinite) {
        const Complex z = a.infinite ? b.value : a.value;
        return 2.0 / std::sqrt(1.0 + std::norm(z));
    }
    return 2.0 * std::abs(a.value - b.value) /
           (std::sqrt(1.0 + std::norm(a.value)) * std::sqrt(1.0 + std::norm(b.value)));
}

} // namespace innerdyn
