#pragma once

// Construction of repelling periodic points on Fatou component boundaries:
// seed a point on the boundary, find a period N whose inverse branch along
// the orbit contracts a working disk into itself, run the pullback to its
// fixed point, and certify it as a repelling N-periodic point of the map.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "innerdyn/boundary_measure.hpp"
#include "innerdyn/error.hpp"
#include "innerdyn/inverse_branches.hpp"
#include "innerdyn/maps.hpp"
#include "innerdyn/poly.hpp"
#include "innerdyn/rng.hpp"

namespace innerdyn {

// A Euclidean disk around a boundary point on which the map is treated as
// conformal. The metric weight rescales distances when monitoring
// contraction; the default leaves the Euclidean metric in place.
struct WorkingNeighbourhood {
    Complex center{1.0, 0.0};
    double radius = 0.1;
    double metric_scale = 1.0;
    std::vector<Complex> orbit;  // forward orbit cache of the center
};

inline WorkingNeighbourhood make_working_neighbourhood(const MapDescriptor& f, Complex x,
                                                       double r, int orbit_length = 16) {
    if (!(r > 0.0)) throw config_error("working neighbourhood: radius must be positive");
    WorkingNeighbourhood w;
    w.center = x;
    w.radius = r;
    double min_deriv = std::numeric_limits<double>::max();
    for (int k = 0; k < 16; ++k) {
        const Complex s = x + std::polar(r, 2.0 * 3.14159265358979323846 * k / 16.0);
        min_deriv = std::min(min_deriv, std::abs(derivative(f, s)));
    }
    min_deriv = std::min(min_deriv, std::abs(derivative(f, x)));
    if (min_deriv <= 1e-8)
        throw numeric_error("working neighbourhood: map is not conformal on the disk");
    w.orbit.push_back(x);
    for (int j = 0; j < orbit_length; ++j) w.orbit.push_back(evaluate(f, w.orbit.back()));
    return w;
}

struct PeriodicPointCertificate {
    Complex point{0.0, 0.0};
    int period = 0;
    Complex multiplier{0.0, 0.0};     // (f^N)'(point)
    double residual = 0.0;            // |f^N(point) - point|
    double contraction_ratio = 0.0;   // observed Lipschitz ratio of the pullback
    std::vector<Complex> anchor;          // branch anchor orbit x_0 .. x_N
    std::vector<Complex> landing_orbit;   // pullback orbit of the start point
};

// ---- boundary seeds --------------------------------------------------------------

enum class SeedMethod { harmonic_walk, repelling_preimage };

struct SeedParams {
    std::uint64_t rng_seed = 1;
    // repelling_preimage
    Complex repeller{1.0, 0.0};
    int depth = 4;
    // harmonic_walk
    Complex attractor{0.0, 0.0};
    Complex walk_base{0.0, 0.0};
    double walk_step = 0.02;
    double refine_tol = 1e-6;
};

namespace detail {

// Tightens a walk hit to a straddle of width refine_tol: an interior point
// and a non-interior point on a common ray, bisected to the midpoint.
inline Complex straddle_refine(const DomainOracle& dom, Complex hit, Complex dir,
                               double span, double tol) {
    double lo = 0.0, hi = 0.0;
    bool have_lo = false, have_hi = false;
    for (int k = 0; k < 24 && !(have_lo && have_hi); ++k) {
        const double t = span * static_cast<double>(k) / 2.0 * (k % 2 ? 1.0 : -1.0);
        const Membership m = domain_membership(dom, hit + t * dir);
        if (m == Membership::inside && (!have_lo || t > lo)) { lo = t; have_lo = true; }
        if (m != Membership::inside && (!have_hi || std::abs(t) < std::abs(hi))) { hi = t; have_hi = true; }
    }
    if (!have_lo || !have_hi)
        throw numeric_error("boundary_seed: could not straddle the boundary near the hit");
    while (std::abs(hi - lo) > tol) {
        const double mid = 0.5 * (lo + hi);
        if (domain_membership(dom, hit + mid * dir) == Membership::inside) lo = mid;
        else hi = mid;
    }
    return hit + 0.5 * (lo + hi) * dir;
}

} // namespace detail

// Produces a point within refine_tol of the component boundary: either by
// pulling a known repelling boundary fixed point back along random preimage
// picks, or by absorbing one fixed-step walk and bisecting the membership
// flip across the hit.
inline Complex boundary_seed(const MapDescriptor& f, SeedMethod method, const SeedParams& params) {
    if (method == SeedMethod::repelling_preimage) {
        if (std::abs(evaluate(f, params.repeller) - params.repeller) > 1e-9)
            throw config_error("boundary_seed: repeller is not a fixed point");
        if (std::abs(derivative(f, params.repeller)) <= 1.0)
            throw config_error("boundary_seed: marked point is not repelling");
        SplitMix64 rng(params.rng_seed);
        Complex x = params.repeller;
        for (int j = 0; j < params.depth; ++j) {
            const auto pre = preimages(f, x);
            if (pre.empty()) throw numeric_error("boundary_seed: no preimages");
            x = pre[static_cast<std::size_t>(rng.next() % pre.size())].value;
        }
        return x;
    }

    DomainOracle dom = make_fatou_oracle(f, params.attractor, params.walk_base);
    WalkParams wp;
    wp.walks = 1;
    wp.rng_seed = params.rng_seed;
    wp.step = params.walk_step;
    const HarmonicSampleSet set = harmonic_sample(dom, wp);
    if (set.hits.empty()) throw numeric_error("boundary_seed: walk timed out");
    const Complex hit = set.hits.front();
    Complex dir = hit - params.attractor;
    const double len = std::abs(dir);
    dir = len > 1e-12 ? dir / len : Complex(1.0, 0.0);
    return detail::straddle_refine(dom, hit, dir, params.walk_step, params.refine_tol);
}

// ---- contracting returns ---------------------------------------------------------

struct ReturnSearch {
    bool found = false;
    int period = 0;
    BranchChain chain;                      // anchored on the accepted orbit
    double return_distance = 0.0;           // |anchor end - anchor start|
    double inverse_derivative_product = 0.0;
    bool recentred = false;  // anchor moved to a nearby periodic orbit
    std::string failure;
};

namespace detail {

inline double critical_clearance(const MapDescriptor& f, const std::vector<Complex>& pts) {
    std::vector<ClusteredRoot> crit;
    try {
        crit = critical_points(f);
    } catch (const std::runtime_error&) {
        return std::numeric_limits<double>::max();  // no finite critical list available
    }
    double clearance = std::numeric_limits<double>::max();
    for (const Complex& p : pts)
        for (const ClusteredRoot& c : crit) clearance = std::min(clearance, std::abs(p - c.value));
    return clearance;
}

inline Complex iterate_with_derivative(const MapDescriptor& f, Complex z, int n, Complex& deriv) {
    deriv = 1.0;
    for (int j = 0; j < n; ++j) {
        deriv *= derivative(f, z);
        z = evaluate(f, z);
    }
    return z;
}

// max of 1/|f'| sampled on small disks around each orbit point, rescaled by
// the metric weight; the single-step pullback must not expand.
inline double max_single_step_expansion(const MapDescriptor& f, const std::vector<Complex>& orbit,
                                        double r, double metric_scale) {
    double worst = 0.0;
    for (std::size_t j = 0; j + 1 < orbit.size(); ++j) {
        for (int k = 0; k < 5; ++k) {
            const Complex s = k == 0 ? orbit[j]
                                     : orbit[j] + std::polar(r / 3.0,
                                           2.0 * 3.14159265358979323846 * (k - 1) / 4.0);
            const double d = std::abs(derivative(f, s));
            if (d < 1e-300) return std::numeric_limits<double>::max();
            worst = std::max(worst, metric_scale / d);
        }
    }
    return worst;
}

} // namespace detail

// Scans forward iterates of x for a return |f^N(x) - x| < r * return_fraction
// whose inverse-derivative product along the orbit is below contraction_bound.
// Boundary seeds with rational structure often collapse onto a fixed point
// instead of returning, so when the forward scan fails the search retries
// each period with a Newton solve of f^N(z) = z started at x and accepts a
// periodic orbit within the same return distance; the chain is then anchored
// on that orbit. All certificate-level checks run downstream either way.
inline ReturnSearch find_contracting_return(const MapDescriptor& f, Complex x, double r, int maxN,
                                            double return_fraction = 1.0 / 3.0,
                                            double contraction_bound = 1.0 / 3.0) {
    if (!(r > 0.0)) throw config_error("find_contracting_return: radius must be positive");
    if (maxN < 1) throw config_error("find_contracting_return: maxN must be at least 1");
    ReturnSearch out;

    std::vector<Complex> orbit{x};
    for (int j = 0; j < maxN; ++j) orbit.push_back(evaluate(f, orbit.back()));

    const double clearance = detail::critical_clearance(f, orbit);
    if (clearance <= r) {
        out.failure = "critical point within the working radius of the orbit";
        return out;
    }

    auto accept = [&](const std::vector<Complex>& anchor, int N, double dist, bool recentred) {
        const double expansion = detail::max_single_step_expansion(f, anchor, r, 1.0);
        if (expansion > 1.0 + 1e-6) return false;
        BranchChain chain;
        chain.map = f;
        chain.depth = N;
        chain.anchor = anchor;
        out.found = true;
        out.period = N;
        out.chain = chain;
        out.return_distance = dist;
        out.recentred = recentred;
        return true;
    };

    for (int N = 1; N <= maxN; ++N) {
        const double dist = std::abs(orbit[static_cast<std::size_t>(N)] - x);
        double prod = 1.0;
        for (int j = 0; j < N; ++j) prod /= std::abs(derivative(f, orbit[static_cast<std::size_t>(j)]));
        if (dist < r * return_fraction && prod < contraction_bound) {
            out.inverse_derivative_product = prod;
            std::vector<Complex> anchor(orbit.begin(), orbit.begin() + N + 1);
            if (accept(anchor, N, dist, false)) return out;
        }
    }

    // Newton on f^N(z) - z needs care here: periodic points near the seed sit
    // in narrow basins, and a plain start at x can fall toward an interior
    // fixed point (a seed on the real axis of a real map can never leave it).
    // Capped steps plus a ring of offset starts break both traps.
    const double step_cap = r / 4.0;
    for (int N = 1; N <= maxN; ++N) {
        for (int s = 0; s < 9; ++s) {
            Complex z = s == 0 ? x
                               : x + std::polar(r / 4.0, 2.0 * 3.14159265358979323846 * (s - 1) / 8.0);
            bool in_disk = true;
            for (int it = 0; it < 48; ++it) {
                Complex deriv;
                const Complex val = detail::iterate_with_derivative(f, z, N, deriv) - z;
                if (std::abs(val) < 1e-13) break;
                const Complex hp = deriv - 1.0;
                if (std::abs(hp) < 1e-14) { in_disk = false; break; }
                Complex dz = val / hp;
                const double mag = std::abs(dz);
                if (mag > step_cap) dz *= step_cap / mag;
                z -= dz;
                if (std::abs(z - x) > 2.0 * r) { in_disk = false; break; }
            }
            if (!in_disk) continue;
            Complex deriv;
            if (std::abs(detail::iterate_with_derivative(f, z, N, deriv) - z) > 1e-12) continue;
            if (std::abs(z - x) >= r * return_fraction) continue;

            std::vector<Complex> anchor{z};
            for (int j = 0; j < N; ++j) anchor.push_back(evaluate(f, anchor.back()));
            if (detail::critical_clearance(f, anchor) <= r) continue;

            double prod = 1.0;
            for (int j = 0; j < N; ++j) prod /= std::abs(derivative(f, anchor[static_cast<std::size_t>(j)]));
            if (!(prod < contraction_bound)) continue;

            out.inverse_derivative_product = prod;
            if (accept(anchor, N, std::abs(z - x), true)) return out;
        }
    }

    out.failure = "no contracting return within the period bound";
    return out;
}

// ---- pullback to the periodic point ----------------------------------------------

namespace detail {

inline Complex branch_map(const BranchChain& chain, Complex w) {
    const ContinuationResult res = continue_branch(chain, w);
    if (!res.completed)
        throw numeric_error("pullback_fixed_point: branch obstruction inside the working disk");
    return res.value;
}

} // namespace detail

// Iterates the branch's pullback to its fixed point and certifies it.
// The pullback must map the disk of the given radius around the anchor start
// strictly into itself (checked on 16 boundary samples); the Banach iterates
// must stay inside that disk; the polished point must be repelling for f.
inline PeriodicPointCertificate pullback_fixed_point(const BranchChain& chain, double radius,
                                                     Complex start, double tol = 1e-12) {
    if (chain.anchor.empty()) throw config_error("pullback_fixed_point: empty chain");
    if (!(radius > 0.0)) throw config_error("pullback_fixed_point: radius must be positive");
    const MapDescriptor& f = chain.map;
    const int N = chain.depth;
    const Complex center = chain.anchor.front();

    for (int k = 0; k < 16; ++k) {
        const Complex w = center + std::polar(radius, 2.0 * 3.14159265358979323846 * k / 16.0);
        const Complex image = detail::branch_map(chain, w);
        if (!(std::abs(image - center) < radius))
            throw numeric_error("pullback_fixed_point: pullback does not map the disk into itself");
    }

    PeriodicPointCertificate cert;
    cert.period = N;
    cert.anchor = chain.anchor;

    if (std::abs(start - center) > radius)
        throw config_error("pullback_fixed_point: start point outside the working disk");

    Complex z = start;
    cert.landing_orbit.push_back(z);
    for (int it = 0; it < 256; ++it) {
        const Complex next = detail::branch_map(chain, z);
        if (std::abs(next - center) > radius)
            throw numeric_error("pullback_fixed_point: iteration left the working disk");
        cert.landing_orbit.push_back(next);
        const double step = std::abs(next - z);
        z = next;
        if (step < tol) break;
    }

    for (int it = 0; it < 24; ++it) {
        Complex deriv;
        const Complex val = detail::iterate_with_derivative(f, z, N, deriv) - z;
        const Complex hp = deriv - 1.0;
        if (std::abs(hp) < 1e-14) throw numeric_error("pullback_fixed_point: degenerate Newton step");
        const Complex dz = val / hp;
        z -= dz;
        if (std::abs(dz) < 1e-15) break;
    }

    cert.point = z;
    Complex deriv;
    cert.residual = std::abs(detail::iterate_with_derivative(f, z, N, deriv) - z);
    cert.multiplier = deriv;

    const double small = std::max(radius / 3.0, 8.0 * std::abs(z - center));
    double k_obs = 0.0;
    for (int k = 0; k < 16; ++k) {
        const Complex w = z + std::polar(small, 2.0 * 3.14159265358979323846 * k / 16.0);
        k_obs = std::max(k_obs, std::abs(detail::branch_map(chain, w) - z) / small);
    }
    cert.contraction_ratio = k_obs;

    if (cert.residual >= 1e-9)
        throw numeric_error("pullback_fixed_point: fixed-point residual too large");
    if (!(std::abs(cert.multiplier) > 1.0 + 1e-6))
        throw numeric_error("pullback_fixed_point: certified point is not repelling");
    if (!(cert.contraction_ratio < 1.0))
        throw numeric_error("pullback_fixed_point: pullback is not contracting at the point");
    return cert;
}

// ---- density experiments ----------------------------------------------------------

enum class SeedPlan { uniform_circle, straddle_walk };

struct DensityParams {
    int seeds = 64;
    double delta = 0.1;       // locality requirement |p - x| < delta
    int max_period = 12;
    double radius = 0.1;      // working disk radius
    SeedPlan plan = SeedPlan::uniform_circle;
    std::uint64_t rng_seed = 1;
    Complex attractor{0.0, 0.0};  // straddle_walk
    Complex walk_base{0.0, 0.0};
    double walk_step = 0.02;
    double return_fraction = 1.0 / 3.0;
    double contraction_bound = 1.0 / 3.0;
};

struct DensityReport {
    int seeds = 0;
    int successes = 0;
    double success_fraction = 0.0;
    std::map<int, int> period_histogram;
    std::vector<Complex> seed_points;                    // by seed index
    std::vector<PeriodicPointCertificate> certificates;  // successes, by seed index
    std::vector<int> certified_seed;                     // seed index per certificate
    std::vector<std::string> failures;                   // seed -> reason, empty on success
};

// One full construction per seed: boundary point, contracting return,
// pullback certificate, locality filter. Seeds are independent; results are
// merged by seed index, so the report is deterministic for a given config.
inline DensityReport density_experiment(const MapDescriptor& f, const DensityParams& params) {
    if (params.seeds <= 0) throw config_error("density_experiment: seeds must be positive");
    DensityReport rep;
    rep.seeds = params.seeds;
    rep.failures.assign(static_cast<std::size_t>(params.seeds), std::string());

    for (int s = 0; s < params.seeds; ++s) {
        Complex x;
        try {
            if (params.plan == SeedPlan::uniform_circle) {
                x = std::polar(1.0, 2.0 * 3.14159265358979323846 * s / params.seeds);
            } else {
                SeedParams sp;
                sp.rng_seed = derive_seed(params.rng_seed, static_cast<std::uint64_t>(s));
                sp.attractor = params.attractor;
                sp.walk_base = params.walk_base;
                sp.walk_step = params.walk_step;
                x = boundary_seed(f, SeedMethod::harmonic_walk, sp);
            }
        } catch (const std::runtime_error& e) {
            rep.failures[static_cast<std::size_t>(s)] = std::string("seed: ") + e.what();
            rep.seed_points.push_back(Complex(0.0, 0.0));
            continue;
        }
        rep.seed_points.push_back(x);

        const ReturnSearch search = find_contracting_return(f, x, params.radius, params.max_period,
                                                            params.return_fraction,
                                                            params.contraction_bound);
        if (!search.found) {
            rep.failures[static_cast<std::size_t>(s)] = search.failure;
            continue;
        }

        try {
            const Complex start = x + 0.02 * (params.attractor - x);
            const PeriodicPointCertificate cert =
                pullback_fixed_point(search.chain, params.radius, start);
            if (std::abs(cert.point - x) >= params.delta) {
                rep.failures[static_cast<std::size_t>(s)] = "certified point too far from the seed";
                continue;
            }
            ++rep.successes;
            ++rep.period_histogram[cert.period];
            rep.certificates.push_back(cert);
            rep.certified_seed.push_back(s);
        } catch (const std::runtime_error& e) {
            rep.failures[static_cast<std::size_t>(s)] = e.what();
        }
    }
    rep.success_fraction = static_cast<double>(rep.successes) / static_cast<double>(rep.seeds);
    return rep;
}

// ---- polynomial oracle -------------------------------------------------------------

struct OraclePoint {
    Complex point{0.0, 0.0};
    Complex multiplier{0.0, 0.0};
};

// All fixed points of f^N (periods dividing N included) for polynomial maps,
// solved simultaneously on the implicit iterate; test instrumentation.
inline std::vector<OraclePoint> oracle_periodic_points(const MapDescriptor& f, int N) {
    if (f.kind != MapKind::power && f.kind != MapKind::polynomial)
        throw config_error("oracle_periodic_points: polynomial maps only");
    if (N < 1) throw config_error("oracle_periodic_points: N must be at least 1");
    const int d = f.kind == MapKind::power ? f.power_degree : poly_degree(f.num);
    if (d < 2) throw config_error("oracle_periodic_points: degree must be at least 2");
    double deg = 1.0;
    for (int j = 0; j < N; ++j) {
        deg *= d;
        if (deg > 16384.0) throw config_error("oracle_periodic_points: iterate degree exceeds the cap");
    }
    const int total = static_cast<int>(deg);

    auto eval_h = [&](Complex z) {
        Complex deriv;
        const Complex val = detail::iterate_with_derivative(f, z, N, deriv);
        return std::make_pair(val - z, deriv - 1.0);
    };
    std::vector<Complex> roots = poly_roots_implicit(total, eval_h);

    std::vector<OraclePoint> out;
    out.reserve(roots.size());
    for (const Complex& rt : roots) {
        Complex deriv;
        detail::iterate_with_derivative(f, rt, N, deriv);
        out.push_back({rt, deriv});
    }
    std::sort(out.begin(), out.end(), [](const OraclePoint& a, const OraclePoint& b) {
        if (a.point.real() != b.point.real()) return a.point.real() < b.point.real();
        return a.point.imag() < b.point.imag();
    });
    return out;
}

} // namespace innerdyn
