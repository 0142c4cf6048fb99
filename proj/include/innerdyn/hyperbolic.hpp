#pragma once
#include <cmath>
#include <complex>

#include "innerdyn/error.hpp"
#include "innerdyn/sphere.hpp"

namespace innerdyn {

// Metric conventions: density 2/(1-|z|^2) on the disk and 1/Im w on the
// upper half-plane (curvature -1 in both charts, the Cayley map is an
// isometry between them). dist(0, r) = log((1+r)/(1-r)).

inline double hyperbolic_distance_disk(Complex z, Complex w) {
    if (std::abs(z) >= 1.0 || std::abs(w) >= 1.0)
        throw config_error("hyperbolic_distance_disk: points must lie inside the disk");
    const double rho = std::abs((z - w) / (1.0 - std::conj(z) * w));
    // log((1+rho)/(1-rho)) via log1p keeps small separations accurate.
    return std::log1p(2.0 * rho / (1.0 - rho));
}

inline double hyperbolic_distance_halfplane(Complex w1, Complex w2) {
    if (w1.imag() <= 0.0 || w2.imag() <= 0.0)
        throw config_error("hyperbolic_distance_halfplane: points must have positive imaginary part");
    const double rho = std::abs((w1 - w2) / (w1 - std::conj(w2)));
    return std::log1p(2.0 * rho / (1.0 - rho));
}

} // namespace innerdyn
