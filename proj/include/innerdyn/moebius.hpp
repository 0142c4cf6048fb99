#pragma once
#include <cmath>
#include <complex>

#include "innerdyn/error.hpp"
#include "innerdyn/sphere.hpp"

namespace innerdyn {

// z -> (a z + b) / (c z + d), stored with a d - b c = 1.
struct MoebiusTransform {
    Complex a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0}, d{1.0, 0.0};
};

inline MoebiusTransform make_moebius(Complex a, Complex b, Complex c, Complex d) {
    const Complex det = a * d - b * c;
    if (std::abs(det) < 1e-14)
        throw config_error("moebius: coefficients are degenerate (|ad-bc| < 1e-14)");
    const Complex s = std::sqrt(det);
    return {a / s, b / s, c / s, d / s};
}

inline ExtendedComplex moebius_apply(const MoebiusTransform& m, const ExtendedComplex& z) {
    if (z.infinite) {
        if (std::abs(m.c) == 0.0) return ExtendedComplex::infinity();
        return ExtendedComplex::of(m.a / m.c);
    }
    const Complex num = m.a * z.value + m.b;
    const Complex den = m.c * z.value + m.d;
    if (std::abs(den) == 0.0 || std::abs(num) > kOverflowGuard * std::abs(den))
        return ExtendedComplex::infinity();
    return ExtendedComplex::of(num / den);
}

// Finite-argument convenience; the pole maps to the overflow guard regime
// via the sphere-aware overload, use that one when poles are in play.
inline Complex moebius_apply(const MoebiusTransform& m, Complex z) {
    const auto w = moebius_apply(m, ExtendedComplex::of(z));
    if (w.infinite) throw numeric_error("moebius: argument at the pole");
    return w.value;
}

// compose(f, g) acts as z -> f(g(z)).
inline MoebiusTransform moebius_compose(const MoebiusTransform& f, const MoebiusTransform& g) {
    return make_moebius(f.a * g.a + f.b * g.c, f.a * g.b + f.b * g.d,
                        f.c * g.a + f.d * g.c, f.c * g.b + f.d * g.d);
}

inline MoebiusTransform moebius_inverse(const MoebiusTransform& m) {
    return make_moebius(m.d, -m.b, -m.c, m.a);
}

// With ad-bc = 1 the derivative is 1/(cz+d)^2.
inline Complex moebius_derivative(const MoebiusTransform& m, Complex z) {
    const Complex den = m.c * z + m.d;
    if (std::abs(den) == 0.0) throw numeric_error("moebius: derivative at the pole");
    return 1.0 / (den * den);
}

// Involutive disk automorphism swapping p and 0: z -> (p - z)/(1 - conj(p) z).
inline MoebiusTransform disk_automorphism(Complex p) {
    if (std::abs(p) >= 1.0)
        throw config_error("disk_automorphism: center must lie strictly inside the disk");
    return make_moebius(Complex{-1.0, 0.0}, p, -std::conj(p), Complex{1.0, 0.0});
}

// Sends the disk to the upper half-plane with the circle point p going to
// infinity: z -> i (p + z)/(p - z). Maps 0 to i.
inline MoebiusTransform disk_to_halfplane(Complex p) {
    if (std::abs(std::abs(p) - 1.0) > 1e-9)
        throw config_error("disk_to_halfplane: anchor must lie on the unit circle");
    const Complex i{0.0, 1.0};
    return make_moebius(i, i * p, Complex{-1.0, 0.0}, p);
}

inline MoebiusTransform halfplane_to_disk(Complex p) {
    return moebius_inverse(disk_to_halfplane(p));
}

} // namespace innerdyn
