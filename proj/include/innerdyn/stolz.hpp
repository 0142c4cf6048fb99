#pragma once
#include <cmath>
#include <complex>
#include <vector>

#include "innerdyn/error.hpp"
#include "innerdyn/moebius.hpp"
#include "innerdyn/sphere.hpp"

namespace innerdyn {

// Points this close to the unit circle (in modulus) are treated as circle
// points by the region predicates.
inline constexpr double kBoundaryBand = 1e-9;

inline bool on_unit_circle(Complex z) { return std::abs(std::abs(z) - 1.0) <= kBoundaryBand; }

// Stolz angle at the circle point xi with half-opening alpha and depth rho,
// generalised by the reference point p: for p inside the disk the region is
// the pullback of the classical angle at M_p(xi) under the automorphism
// M_p swapping p and 0; for p on the circle it is the pullback of the
// half-plane wedge {|Re w - x| < tan(alpha) Im w, Im w < rho} under
// z -> i (p+z)/(p-z).
struct StolzAngleSpec {
    Complex xi;
    Complex p{0.0, 0.0};
    double alpha = 0.5235987755982988;  // pi/6
    double rho = 1.0;
};

// Radial segment at xi generalised the same way; rho is the depth of the
// segment in the model chart (radial length for interior p, Euclidean
// height for circle p).
struct RadialSegmentSpec {
    Complex xi;
    Complex p{0.0, 0.0};
    double rho = 0.5;
};

namespace detail {

inline void check_vertex(Complex xi) {
    if (!on_unit_circle(xi))
        throw config_error("stolz: vertex must lie on the unit circle");
}

inline bool reference_on_circle(Complex p) {
    if (std::abs(p) < 1.0 - kBoundaryBand) return false;
    if (on_unit_circle(p)) return true;
    throw config_error("stolz: reference point must lie in the closed disk");
}

} // namespace detail

// Angle of z as seen in the region's model chart: |Arg eta - Arg(eta - w)|
// for interior p (eta the image of xi, w the image of z), atan of slope in
// the half-plane chart for circle p. in_stolz_angle compares this to alpha.
inline double generalized_stolz_angle(Complex xi, Complex p, Complex z) {
    detail::check_vertex(xi);
    if (!detail::reference_on_circle(p)) {
        const auto m = disk_automorphism(p);
        const Complex eta = moebius_apply(m, xi);
        const Complex w = moebius_apply(m, z);
        if (std::abs(eta - w) == 0.0) return 0.0;
        return std::abs(std::arg(eta * std::conj(eta - w)));
    }
    if (std::abs(xi - p) <= kBoundaryBand)
        throw config_error("stolz: vertex coincides with the circle reference point");
    const auto m = disk_to_halfplane(p);
    const Complex x = moebius_apply(m, xi);  // real up to rounding
    const Complex w = moebius_apply(m, z);
    if (w.imag() <= 0.0) return 1.5707963267948966;
    return std::atan(std::abs(w.real() - x.real()) / w.imag());
}

inline bool in_stolz_angle(const StolzAngleSpec& spec, Complex z) {
    detail::check_vertex(spec.xi);
    if (!(spec.alpha > 0.0) || spec.alpha >= 1.5707963267948966)
        throw config_error("stolz: opening must satisfy 0 < alpha < pi/2");
    if (!(spec.rho > 0.0)) throw config_error("stolz: depth must be positive");
    const double az = std::abs(z);
    if (az >= 1.0 - kBoundaryBand) return false;  // circle and exterior points are out
    if (!detail::reference_on_circle(spec.p)) {
        const auto m = disk_automorphism(spec.p);
        const Complex w = moebius_apply(m, z);
        if (std::abs(w) <= 1.0 - spec.rho) return false;
        return generalized_stolz_angle(spec.xi, spec.p, z) < spec.alpha;
    }
    const auto m = disk_to_halfplane(spec.p);
    const Complex w = moebius_apply(m, z);
    const Complex x = moebius_apply(m, spec.xi);
    if (w.imag() <= 0.0 || w.imag() >= spec.rho) return false;
    return std::abs(w.real() - x.real()) < std::tan(spec.alpha) * w.imag();
}

// Points of the generalised radial segment at xi, ordered toward xi,
// endpoints excluded. Every returned point lies in each Stolz angle at
// (xi, p) and the sequence converges to xi.
inline std::vector<Complex> radial_segment_points(const RadialSegmentSpec& spec, int count) {
    detail::check_vertex(spec.xi);
    if (count < 1) throw config_error("radial_segment_points: count must be positive");
    if (!(spec.rho > 0.0)) throw config_error("radial_segment_points: depth must be positive");
    std::vector<Complex> pts;
    pts.reserve(static_cast<std::size_t>(count));
    if (!detail::reference_on_circle(spec.p)) {
        if (!(spec.rho <= 1.0))
            throw config_error("radial_segment_points: interior reference needs rho <= 1");
        const auto m = disk_automorphism(spec.p);  // involution, doubles as its inverse
        const Complex eta = moebius_apply(m, spec.xi);
        for (int i = 1; i <= count; ++i) {
            const double t = (1.0 - spec.rho) +
                             spec.rho * static_cast<double>(i) / static_cast<double>(count + 1);
            pts.push_back(moebius_apply(m, t * eta));
        }
        return pts;
    }
    if (std::abs(spec.xi - spec.p) <= kBoundaryBand)
        throw config_error("radial_segment_points: vertex coincides with the circle reference");
    const auto m = disk_to_halfplane(spec.p);
    const auto minv = moebius_inverse(m);
    const double x = moebius_apply(m, spec.xi).real();
    for (int i = 1; i <= count; ++i) {
        const double s =
            spec.rho * (1.0 - static_cast<double>(i) / static_cast<double>(count + 1));
        pts.push_back(moebius_apply(minv, Complex{x, s}));
    }
    return pts;
}

// Polyline crosscut at xi: a circular arc {|z - xi| = diameter} clipped to
// the disk, endpoints on the unit circle. The neighbourhood it cuts off is
// the lens {|z - xi| < diameter} inside the disk.
struct CrosscutNeighbourhood {
    Complex xi;
    double diameter = 0.25;
    std::vector<Complex> polyline;
};

inline CrosscutNeighbourhood crosscut_at(Complex xi, double diameter, int segments = 64) {
    detail::check_vertex(xi);
    if (segments < 32) throw config_error("crosscut_at: need at least 32 segments");
    if (!(diameter > 0.0) || diameter >= 2.0)
        throw config_error("crosscut_at: diameter must lie in (0, 2)");
    // Circle |z - xi| = d meets the unit circle where the angular offset
    // from xi is +-2 asin(d/2).
    const double half = 2.0 * std::asin(0.5 * diameter);
    const double base = std::arg(xi);
    const double a0 = std::arg(std::exp(Complex{0.0, base - half}) - xi);
    const double a1 = std::arg(std::exp(Complex{0.0, base + half}) - xi);
    // Walk the short way through the interior of the disk.
    double sweep = a1 - a0;
    while (sweep > 3.141592653589793) sweep -= 6.283185307179586;
    while (sweep < -3.141592653589793) sweep += 6.283185307179586;
    CrosscutNeighbourhood cc;
    cc.xi = xi;
    cc.diameter = diameter;
    cc.polyline.reserve(static_cast<std::size_t>(segments) + 1);
    for (int k = 0; k <= segments; ++k) {
        const double t = a0 + sweep * static_cast<double>(k) / static_cast<double>(segments);
        cc.polyline.push_back(xi + diameter * Complex{std::cos(t), std::sin(t)});
    }
    return cc;
}

inline bool crosscut_contains(const CrosscutNeighbourhood& cc, Complex z) {
    return std::abs(z) < 1.0 && std::abs(z - cc.xi) < cc.diameter;
}

} // namespace innerdyn
