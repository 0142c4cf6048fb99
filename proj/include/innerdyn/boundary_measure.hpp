#pragma once

// Harmonic measure on plane domains: exact Poisson formulas for the disk and
// the upper half-plane, plus Monte Carlo sampling (walk-on-spheres for the
// exact domains, a fixed-step walk for Fatou components described only by an
// orbit-membership test).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "innerdyn/error.hpp"
#include "innerdyn/maps.hpp"
#include "innerdyn/moebius.hpp"
#include "innerdyn/rng.hpp"

namespace innerdyn {

enum class DomainKind { exact_disk, exact_halfplane, fatou_component };

enum class Membership { inside, outside, unresolved };

// A domain with a marked base point. The exact kinds carry nothing else; a
// Fatou component is known only through its map, the attractor the component
// belongs to, and an orbit budget.
struct DomainOracle {
    DomainKind kind = DomainKind::exact_disk;
    Complex base = 0.0;

    MapDescriptor map;           // fatou_component only
    Complex attractor = 0.0;
    double attractor_tol = 1e-6;
    int orbit_budget = 1000;
    double escape_radius = 1e6;
};

inline Membership domain_membership(const DomainOracle& dom, Complex z) {
    switch (dom.kind) {
        case DomainKind::exact_disk:
            return std::abs(z) < 1.0 ? Membership::inside : Membership::outside;
        case DomainKind::exact_halfplane:
            return z.imag() > 0.0 ? Membership::inside : Membership::outside;
        case DomainKind::fatou_component: break;
    }
    Complex w = z;
    for (int i = 0; i < dom.orbit_budget; ++i) {
        if (std::abs(w - dom.attractor) < dom.attractor_tol) return Membership::inside;
        if (std::abs(w) > dom.escape_radius) return Membership::outside;
        w = evaluate(dom.map, w);
        if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
            return Membership::outside;
    }
    return Membership::unresolved;
}

inline DomainOracle make_disk_oracle(Complex base = 0.0) {
    if (std::abs(base) >= 1.0) throw config_error("disk oracle: base point not inside");
    DomainOracle d;
    d.kind = DomainKind::exact_disk;
    d.base = base;
    return d;
}

inline DomainOracle make_halfplane_oracle(Complex base) {
    if (base.imag() <= 0.0) throw config_error("halfplane oracle: base point not inside");
    DomainOracle d;
    d.kind = DomainKind::exact_halfplane;
    d.base = base;
    return d;
}

inline DomainOracle make_fatou_oracle(const MapDescriptor& map, Complex attractor,
                                      Complex base) {
    DomainOracle d;
    d.kind = DomainKind::fatou_component;
    d.map = map;
    d.attractor = attractor;
    d.base = base;
    if (domain_membership(d, base) != Membership::inside)
        throw config_error("fatou oracle: base point does not reach the attractor");
    return d;
}

// Harmonic measure from z0 of the boundary arc { e^{i t} : theta1 <= t <= theta2 }.
// The automorphism sending z0 to 0 turns the measure into normalized arc
// length, so the value is the angular length of the image arc over 2 pi.
inline double poisson_arc_measure(Complex z0, double theta1, double theta2) {
    if (std::abs(z0) >= 1.0) throw config_error("poisson_arc_measure: z0 not inside");
    if (!(theta2 > theta1)) throw config_error("poisson_arc_measure: empty arc");
    constexpr double two_pi = 6.283185307179586476925286766559;
    if (theta2 - theta1 >= two_pi) return 1.0;
    const MoebiusTransform m = disk_automorphism(z0);
    const Complex e1 = moebius_apply(m, std::polar(1.0, theta1));
    const Complex e2 = moebius_apply(m, std::polar(1.0, theta2));
    double span = std::arg(e2) - std::arg(e1);
    // disk automorphisms preserve the circle's orientation
    if (span <= 0.0) span += two_pi;
    return span / two_pi;
}

// Harmonic measure from w0 (upper half-plane) of the boundary interval [x1, x2].
inline double halfplane_interval_measure(Complex w0, double x1, double x2) {
    if (w0.imag() <= 0.0) throw config_error("halfplane_interval_measure: w0 not inside");
    if (!(x2 > x1)) throw config_error("halfplane_interval_measure: empty interval");
    const double pi = 3.14159265358979323846;
    return (std::atan2(x2 - w0.real(), w0.imag()) -
            std::atan2(x1 - w0.real(), w0.imag())) / pi;
}

struct WalkParams {
    int walks = 100000;
    std::uint64_t rng_seed = 1;
    double step = 1e-3;        // fatou_component walk step
    double absorb_band = 1e-6; // walk-on-spheres absorption distance
    long max_steps = 1000000;
};

struct HarmonicSampleSet {
    DomainKind kind = DomainKind::exact_disk;
    Complex base = 0.0;
    std::vector<Complex> hits;   // ordered by walk index
    std::vector<long> steps;     // per completed walk
    int timeouts = 0;
    WalkParams params;
};

namespace detail {

inline Complex unit_step(SplitMix64& rng) {
    const double t = rng.uniform() * 6.283185307179586476925286766559;
    return {std::cos(t), std::sin(t)};
}

// Walk-on-spheres inside the unit disk: each jump lands uniformly on a circle
// whose radius is the exact distance to the boundary.
inline bool wos_disk_walk(Complex start, const WalkParams& p, SplitMix64& rng,
                          Complex& hit, long& nsteps) {
    Complex z = start;
    for (long n = 0; n < p.max_steps; ++n) {
        const double d = 1.0 - std::abs(z);
        if (d < p.absorb_band) {
            hit = z / std::abs(z);
            nsteps = n;
            return true;
        }
        z += d * unit_step(rng);
    }
    return false;
}

inline bool wos_halfplane_walk(Complex start, const WalkParams& p, SplitMix64& rng,
                               Complex& hit, long& nsteps) {
    Complex w = start;
    for (long n = 0; n < p.max_steps; ++n) {
        const double d = w.imag();
        if (d < p.absorb_band) {
            hit = Complex(w.real(), 0.0);
            nsteps = n;
            return true;
        }
        w += d * unit_step(rng);
    }
    return false;
}

// Fixed-step walk for a membership-only domain. The walk absorbs at the
// midpoint of the first step whose endpoint stops resolving as interior.
inline bool fatou_walk(const DomainOracle& dom, Complex start, const WalkParams& p,
                       SplitMix64& rng, Complex& hit, long& nsteps) {
    Complex z = start;
    for (long n = 0; n < p.max_steps; ++n) {
        const Complex next = z + p.step * unit_step(rng);
        if (domain_membership(dom, next) != Membership::inside) {
            hit = 0.5 * (z + next);
            nsteps = n + 1;
            return true;
        }
        z = next;
    }
    return false;
}

} // namespace detail

// Runs params.walks independent walks from the base point. Each walk draws
// from its own SplitMix64 stream seeded by derive_seed(rng_seed, walk index),
// so the merged result is reproducible regardless of evaluation order.
// Timed-out walks contribute no sample and are counted separately.
inline HarmonicSampleSet harmonic_sample(const DomainOracle& dom, const WalkParams& params) {
    if (params.walks <= 0) throw config_error("harmonic_sample: walks must be positive");
    if (params.step <= 0.0 || params.absorb_band <= 0.0)
        throw config_error("harmonic_sample: step sizes must be positive");
    if (domain_membership(dom, dom.base) != Membership::inside)
        throw config_error("harmonic_sample: base point not inside the domain");

    HarmonicSampleSet out;
    out.kind = dom.kind;
    out.base = dom.base;
    out.params = params;
    out.hits.reserve(static_cast<std::size_t>(params.walks));
    out.steps.reserve(static_cast<std::size_t>(params.walks));

    for (int w = 0; w < params.walks; ++w) {
        SplitMix64 rng(derive_seed(params.rng_seed, static_cast<std::uint64_t>(w)));
        Complex hit;
        long nsteps = 0;
        bool ok = false;
        switch (dom.kind) {
            case DomainKind::exact_disk:
                ok = detail::wos_disk_walk(dom.base, params, rng, hit, nsteps);
                break;
            case DomainKind::exact_halfplane:
                ok = detail::wos_halfplane_walk(dom.base, params, rng, hit, nsteps);
                break;
            case DomainKind::fatou_component:
                ok = detail::fatou_walk(dom, dom.base, params, rng, hit, nsteps);
                break;
        }
        if (ok) {
            out.hits.push_back(hit);
            out.steps.push_back(nsteps);
        } else {
            ++out.timeouts;
        }
    }
    return out;
}

// Fraction of hits landing on the circle arc [theta1, theta2] (angles taken
// mod 2 pi). Works on the hit arguments, so it applies to any sample set
// whose boundary is the unit circle.
inline double arc_hit_fraction(const HarmonicSampleSet& set, double theta1, double theta2) {
    if (set.hits.empty()) throw config_error("arc_hit_fraction: empty sample set");
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double lo = theta1 - two_pi * std::floor(theta1 / two_pi);
    const double span = theta2 - theta1;
    if (!(span > 0.0)) throw config_error("arc_hit_fraction: empty arc");
    std::size_t count = 0;
    for (const Complex& h : set.hits) {
        double a = std::arg(h) - lo;
        a -= two_pi * std::floor(a / two_pi);
        if (a <= span) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(set.hits.size());
}

// Fraction of probe points that have at least one sample within radius r.
inline double support_density_check(const HarmonicSampleSet& set,
                                    const std::vector<Complex>& probes, double r) {
    if (probes.empty()) throw config_error("support_density_check: no probes");
    if (r <= 0.0) throw config_error("support_density_check: radius must be positive");
    std::size_t covered = 0;
    for (const Complex& q : probes) {
        for (const Complex& h : set.hits) {
            if (std::abs(h - q) <= r) {
                ++covered;
                break;
            }
        }
    }
    return static_cast<double>(covered) / static_cast<double>(probes.size());
}

// Two-sample Kolmogorov-Smirnov statistic for samples of circle angles,
// compared as distributions on [0, 2 pi).
inline double two_sample_ks(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw config_error("two_sample_ks: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j]) ++i; else ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na -
                                 static_cast<double>(j) / nb));
    }
    return d;
}

inline std::vector<double> hit_angles(const HarmonicSampleSet& set) {
    constexpr double two_pi = 6.283185307179586476925286766559;
    std::vector<double> out;
    out.reserve(set.hits.size());
    for (const Complex& h : set.hits) {
        double a = std::arg(h);
        if (a < 0.0) a += two_pi;
        out.push_back(a);
    }
    return out;
}

// Sup-norm discrepancy of circle angles against the uniform distribution,
// evaluated at both sides of each order statistic.
inline double uniform_angle_discrepancy(std::vector<double> angles) {
    if (angles.empty()) throw config_error("uniform_angle_discrepancy: empty sample");
    constexpr double two_pi = 6.283185307179586476925286766559;
    std::sort(angles.begin(), angles.end());
    const double n = static_cast<double>(angles.size());
    double d = 0.0;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        const double u = angles[i] / two_pi;
        d = std::max(d, std::abs(u - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - u));
    }
    return d;
}

} // namespace innerdyn
