#pragma once
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "innerdyn/error.hpp"
#include "innerdyn/rng.hpp"
#include "innerdyn/sphere.hpp"

namespace innerdyn {

// C(r) = sum_{n>=2} n r^(n-1) = 1/(1-r)^2 - 1. Controls how far a
// normalised univalent map may stray from its linearisation: for psi
// univalent on the unit disk with psi(0)=0, psi'(0)=1 the coefficient
// bound |a_n| <= n gives |psi(z) - z| <= C(|z|) |z|.
inline double distortion_constant(double r) {
    if (!(r >= 0.0) || r >= 1.0)
        throw config_error("distortion_constant: radius must satisfy 0 <= r < 1");
    const double u = 1.0 - r;
    return r * (2.0 - r) / (u * u);  // == 1/(1-r)^2 - 1 without the 1-1 cancellation at small r
}

struct CoefficientQuadrature {
    double radius = 0.5;
    double check_radius = 0.6;
    int min_nodes = 4096;
    int max_nodes = 1 << 20;
    double tol = 1e-10;
};

namespace detail {

template <typename F>
Complex contour_coefficient(F&& f, int n, double rho, const CoefficientQuadrature& q) {
    int m = q.min_nodes;
    Complex prev{0.0, 0.0};
    bool have_prev = false;
    for (;; m *= 2) {
        Complex acc{0.0, 0.0};
        const double step = 6.283185307179586476925286766559 / m;
        for (int j = 0; j < m; ++j) {
            const double th = step * j;
            const Complex z = rho * Complex{std::cos(th), std::sin(th)};
            const Complex ph = Complex{std::cos(n * th), -std::sin(n * th)};
            acc += f(z) * ph;
        }
        acc /= static_cast<double>(m) * std::pow(rho, n);
        if (have_prev && std::abs(acc - prev) < q.tol) return acc;
        if (m >= q.max_nodes)
            throw numeric_error("coefficient_estimate: quadrature did not settle");
        prev = acc;
        have_prev = true;
    }
}

} // namespace detail

// n-th Taylor coefficient of f at 0 by trapezoidal contour quadrature,
// refined by node doubling and cross-checked on a second radius.
template <typename F>
Complex coefficient_estimate(F&& f, int n, CoefficientQuadrature q = {}) {
    if (n < 0) throw config_error("coefficient_estimate: order must be non-negative");
    if (!(q.radius > 0.0) || q.radius >= 1.0 || !(q.check_radius > 0.0) || q.check_radius >= 1.0)
        throw config_error("coefficient_estimate: contour radii must lie in (0, 1)");
    const Complex a = detail::contour_coefficient(f, n, q.radius, q);
    const Complex b = detail::contour_coefficient(f, n, q.check_radius, q);
    if (std::abs(a - b) > 1e-8 * (1.0 + std::abs(a)))
        throw numeric_error("coefficient_estimate: radii disagree beyond tolerance");
    return a;
}

struct DistortionCheck {
    double constant = 0.0;       // C(r/r0)
    double max_violation = 0.0;  // max |phi - L| - C |phi'(z0)||z - z0|; <= 0 when the bound holds
    Complex worst_point{0.0, 0.0};
    int samples = 0;
};

// Samples the inequality |phi(z) - L(z)| <= C(r/r0) |phi'(z0)| |z - z0|
// on random points of D(z0, r), where L is the linearisation at z0 and
// phi is univalent on D(z0, r0).
template <typename F>
DistortionCheck distortion_bound_check(F&& phi, Complex z0, Complex dphi_z0, double r0, double r,
                                       int samples, std::uint64_t seed) {
    if (!(r > 0.0) || !(r0 > 0.0) || r >= r0)
        throw config_error("distortion_bound_check: need 0 < r < r0");
    if (samples < 1) throw config_error("distortion_bound_check: need at least one sample");
    const double C = distortion_constant(r / r0);
    const Complex phi0 = phi(z0);
    DistortionCheck out;
    out.constant = C;
    out.samples = samples;
    out.max_violation = -kOverflowGuard;
    SplitMix64 rng(seed);
    for (int i = 0; i < samples; ++i) {
        // Stay a hair inside the open disk so the sup is approached, never crossed.
        const Complex dz = rng.in_disk(0.999 * r);
        if (std::abs(dz) < 1e-12) continue;
        const Complex z = z0 + dz;
        const Complex linear = phi0 + dphi_z0 * dz;
        const double lhs = std::abs(phi(z) - linear);
        const double rhs = C * std::abs(dphi_z0) * std::abs(dz);
        const double violation = lhs - rhs;
        if (violation > out.max_violation) {
            out.max_violation = violation;
            out.worst_point = z;
        }
    }
    return out;
}

} // namespace innerdyn
