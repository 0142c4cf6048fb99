#pragma once
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "innerdyn/distortion.hpp"
#include "innerdyn/error.hpp"
#include "innerdyn/maps.hpp"
#include "innerdyn/rng.hpp"
#include "innerdyn/stolz.hpp"

namespace innerdyn {

// ---- preimages ---------------------------------------------------------------

struct Preimage {
    Complex value{0.0, 0.0};
    Complex map_derivative{0.0, 0.0};
    int multiplicity = 1;
    bool critical = false;  // multiple root: w sits on a critical value
};

// All finite solutions of g(z) = w for kinds with a rational normal form,
// polished to residual 1e-12 and sorted by angle for deterministic branch
// indexing. Coincident roots collapse into one flagged entry.
inline std::vector<Preimage> preimages(const MapDescriptor& g, Complex w) {
    Poly p, q;
    switch (g.kind) {
        case MapKind::power: {
            p.assign(static_cast<std::size_t>(g.power_degree) + 1, Complex{0.0, 0.0});
            p.back() = Complex{1.0, 0.0};
            q = Poly{Complex{1.0, 0.0}};
            break;
        }
        case MapKind::polynomial:
            p = g.num;
            q = Poly{Complex{1.0, 0.0}};
            break;
        case MapKind::rational:
        case MapKind::newton_of_polynomial:
            p = g.num;
            q = g.den;
            break;
        case MapKind::finite_blaschke: {
            p = Poly{g.rotation};
            q = Poly{Complex{1.0, 0.0}};
            for (const Complex a : g.blaschke_zeros) {
                p = poly_mul(p, Poly{-a, Complex{1.0, 0.0}});
                q = poly_mul(q, Poly{Complex{1.0, 0.0}, -std::conj(a)});
            }
            break;
        }
        case MapKind::halfplane_moebius_model: {
            const auto& m = g.disk_model;
            p = Poly{m.b, m.a};
            q = Poly{m.d, m.c};
            break;
        }
        default:
            throw config_error("preimages: map kind has no polynomial preimage equation");
    }
    // p(z) - w q(z) = 0
    Poly eq = poly_sub(p, poly_scale(q, w));
    poly_trim(eq, 1e-300);
    if (poly_degree(eq) < 1) throw numeric_error("preimages: preimage equation degenerated");
    std::vector<Complex> roots = poly_roots(eq);
    // Newton polish against the map itself.
    for (Complex& z : roots) {
        for (int it = 0; it < 12; ++it) {
            Complex val, der;
            try {
                val = evaluate(g, z) - w;
                der = derivative(g, z);
            } catch (const numeric_error&) {
                break;
            }
            if (std::abs(der) < 1e-14) break;
            const Complex step = val / der;
            z -= step;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
        }
    }
    const auto clustered = cluster_roots(roots, 1e-6);
    std::vector<Preimage> out;
    out.reserve(clustered.size());
    for (const auto& c : clustered) {
        Preimage pi;
        pi.value = c.value;
        pi.multiplicity = c.multiplicity;
        try {
            pi.map_derivative = derivative(g, c.value);
        } catch (const numeric_error&) {
            pi.map_derivative = Complex{0.0, 0.0};
        }
        pi.critical = c.multiplicity > 1 || std::abs(pi.map_derivative) < 1e-7;
        out.push_back(pi);
    }
    std::sort(out.begin(), out.end(), [](const Preimage& a, const Preimage& b) {
        const double aa = std::arg(a.value), ab = std::arg(b.value);
        if (aa != ab) return aa < ab;
        return std::abs(a.value) < std::abs(b.value);
    });
    return out;
}

// ---- branch chains -------------------------------------------------------------

// A depth-n inverse branch of g^n realized along a stored forward orbit:
// anchor[j+1] = g(anchor[j]), so the branch sends anchor[n] back to
// anchor[0] and continuation transports it to nearby targets.
struct BranchChain {
    MapDescriptor map;
    int depth = 0;
    std::vector<Complex> anchor;  // x_0 .. x_n with g(x_j) = x_{j+1}
    double validity_radius = 0.0;  // largest tested target distance that continued cleanly
};

inline BranchChain branch_chain_from_orbit(const MapDescriptor& g, Complex x0, int depth,
                                           double anchor_tol = 1e-10) {
    if (depth < 0) throw config_error("branch_chain_from_orbit: depth must be non-negative");
    BranchChain c;
    c.map = g;
    c.depth = depth;
    c.anchor.push_back(x0);
    for (int j = 0; j < depth; ++j) c.anchor.push_back(evaluate(g, c.anchor.back()));
    // residuals are zero by construction; re-check to honor the contract
    for (int j = 0; j < depth; ++j)
        if (std::abs(evaluate(g, c.anchor[static_cast<std::size_t>(j)]) -
                     c.anchor[static_cast<std::size_t>(j) + 1]) > anchor_tol)
            throw numeric_error("branch_chain_from_orbit: anchor residual too large");
    return c;
}

// Builds the chain downward from the top point by preimage selection;
// choice[k] indexes the sorted preimage list at step k, and -1 picks the
// preimage closest to the current point.
inline BranchChain branch_chain_by_choices(const MapDescriptor& g, Complex top,
                                           const std::vector<int>& choices) {
    std::vector<Complex> down{top};
    for (const int pick : choices) {
        const auto pre = preimages(g, down.back());
        if (pre.empty()) throw numeric_error("branch_chain_by_choices: no preimages found");
        std::size_t idx = 0;
        if (pick < 0) {
            double best = std::numeric_limits<double>::max();
            for (std::size_t i = 0; i < pre.size(); ++i) {
                const double d = std::abs(pre[i].value - down.back());
                if (d < best) {
                    best = d;
                    idx = i;
                }
            }
        } else if (static_cast<std::size_t>(pick) < pre.size()) {
            idx = static_cast<std::size_t>(pick);
        } else {
            throw config_error("branch_chain_by_choices: choice index out of range");
        }
        down.push_back(pre[idx].value);
    }
    BranchChain c;
    c.map = g;
    c.depth = static_cast<int>(choices.size());
    c.anchor.assign(down.rbegin(), down.rend());
    return c;
}

struct ContinuationResult {
    bool completed = false;
    Complex value{0.0, 0.0};          // depth-n preimage at the target on this branch
    std::vector<Complex> chain_end;   // full tuple z_0..z_n at the final base point
    double progress = 0.0;            // fraction of the segment covered
    double min_derivative = 0.0;      // smallest |g'| seen along the tower
    Complex obstruction{0.0, 0.0};    // base point where continuation stalled
    Complex nearest_critical{0.0, 0.0};
    bool has_nearest_critical = false;
    int newton_steps = 0;
};

struct ContinueOptions {
    double newton_tol = 1e-12;
    int newton_iters = 8;
    double min_step = 1e-12;  // fraction of the segment; below this, obstruction
    double initial_step = 0.25;
};

// Transports the whole inverse tower along the straight segment from the
// chain's top anchor to the target. Predictor by the chain rule, corrector
// by per-layer Newton; failed correctors halve the step until underflow,
// which is reported as a branch obstruction with the blocking location.
inline ContinuationResult continue_branch(const BranchChain& chain, Complex target,
                                          ContinueOptions opt = {}) {
    if (chain.anchor.empty()) throw config_error("continue_branch: empty chain");
    const MapDescriptor& g = chain.map;
    const int n = chain.depth;
    ContinuationResult res;
    res.min_derivative = std::numeric_limits<double>::max();

    std::vector<Complex> z = chain.anchor;  // z[0..n], z[n] is the moving base
    const Complex start = chain.anchor.back();
    const Complex seg = target - start;
    const double seg_len = std::abs(seg);
    if (seg_len == 0.0) {
        res.completed = true;
        res.value = chain.anchor.front();
        res.chain_end = z;
        res.progress = 1.0;
        return res;
    }

    double t = 0.0;
    double h = opt.initial_step;
    while (t < 1.0) {
        if (h < opt.min_step) {
            res.obstruction = start + t * seg;
            // locate the tightest layer and its nearest critical point
            try {
                double worst = std::numeric_limits<double>::max();
                Complex worst_z{0.0, 0.0};
                for (int j = 0; j < n; ++j) {
                    const double d = std::abs(derivative(g, z[static_cast<std::size_t>(j)]));
                    if (d < worst) {
                        worst = d;
                        worst_z = z[static_cast<std::size_t>(j)];
                    }
                }
                if (n > 0) {
                    const auto cps = critical_points(g);
                    double best = std::numeric_limits<double>::max();
                    for (const auto& cp : cps) {
                        const double d = std::abs(cp.value - worst_z);
                        if (d < best) {
                            best = d;
                            res.nearest_critical = cp.value;
                            res.has_nearest_critical = true;
                        }
                    }
                }
            } catch (const numeric_error&) {
            } catch (const config_error&) {
            }
            res.progress = t;
            return res;
        }
        const double t_next = std::min(1.0, t + h);
        const Complex w_next = start + t_next * seg;
        const Complex dw = w_next - z[static_cast<std::size_t>(n)];

        // predictor down the tower
        std::vector<Complex> trial = z;
        std::vector<double> predicted(static_cast<std::size_t>(n) + 1, 0.0);
        trial[static_cast<std::size_t>(n)] = w_next;
        predicted[static_cast<std::size_t>(n)] = std::abs(dw);
        bool ok = true;
        Complex delta = dw;
        for (int j = n - 1; j >= 0 && ok; --j) {
            Complex der;
            try {
                der = derivative(g, z[static_cast<std::size_t>(j)]);
            } catch (const numeric_error&) {
                ok = false;
                break;
            }
            if (std::abs(der) < 1e-14) {
                ok = false;
                break;
            }
            delta /= der;
            trial[static_cast<std::size_t>(j)] = z[static_cast<std::size_t>(j)] + delta;
            predicted[static_cast<std::size_t>(j)] = std::abs(delta);
        }
        // corrector: solve g(z_j) = z_{j+1} layer by layer from the top.
        // Newton's first decrement must stay a fraction of the predicted
        // move; a larger one means the local linearization broke down
        // (branch point nearby) and the step is rejected instead of risking
        // a hop onto a different branch.
        for (int j = n - 1; j >= 0 && ok; --j) {
            const Complex goal = trial[static_cast<std::size_t>(j) + 1];
            Complex x = trial[static_cast<std::size_t>(j)];
            const double allowance =
                0.3 * predicted[static_cast<std::size_t>(j)] + opt.newton_tol * (1.0 + std::abs(x));
            bool solved = false;
            for (int it = 0; it < opt.newton_iters; ++it) {
                Complex val, der;
                try {
                    val = evaluate(g, x) - goal;
                    der = derivative(g, x);
                } catch (const numeric_error&) {
                    break;
                }
                ++res.newton_steps;
                if (std::abs(der) < 1e-14) break;
                const Complex nstep = val / der;
                if (it == 0 && std::abs(nstep) > allowance) break;
                x -= nstep;
                if (std::abs(evaluate(g, x) - goal) < opt.newton_tol * (1.0 + std::abs(goal))) {
                    solved = true;
                    break;
                }
            }
            if (!solved) {
                ok = false;
                break;
            }
            trial[static_cast<std::size_t>(j)] = x;
            const double d = std::abs(derivative(g, x));
            res.min_derivative = std::min(res.min_derivative, d);
        }
        if (!ok) {
            h *= 0.5;
            continue;
        }
        z = trial;
        t = t_next;
        res.progress = t;
        if (h < opt.initial_step) h *= 2.0;  // recover after successful halved steps
    }
    res.completed = true;
    res.value = z.front();
    res.chain_end = std::move(z);
    if (res.min_derivative == std::numeric_limits<double>::max()) res.min_derivative = 0.0;
    return res;
}

// Chain invariant check: anchors are a forward orbit and the continued
// branch applied at the top anchor reproduces the bottom anchor.
inline bool verify_branch_chain(const BranchChain& chain, double anchor_tol = 1e-10,
                                double roundtrip_tol = 1e-9) {
    if (chain.anchor.size() != static_cast<std::size_t>(chain.depth) + 1) return false;
    for (int j = 0; j < chain.depth; ++j) {
        if (std::abs(evaluate(chain.map, chain.anchor[static_cast<std::size_t>(j)]) -
                     chain.anchor[static_cast<std::size_t>(j) + 1]) > anchor_tol)
            return false;
    }
    const auto res = continue_branch(chain, chain.anchor.back());
    if (!res.completed) return false;
    return std::abs(res.value - chain.anchor.front()) <= roundtrip_tol;
}

// ---- well-definedness radius ---------------------------------------------------

struct WellDefinednessEstimate {
    Complex xi{1.0, 0.0};
    int depth = 0;
    double rho0 = 0.0;
    bool degenerate = false;  // singular cloud touches xi: rho0 = 0 reported
    bool validated = false;   // 16 random branches continued with zero obstructions
    int validation_chains = 0;
    double validation_radius = 0.0;  // targets were placed on this circle
    bool cloud_reached_infinity = false;
    std::size_t cloud_size = 0;
};

struct RadiusOptions {
    double cap = 2.0;
    int validation_count = 16;
    std::uint64_t seed = 2026;
};

// rho0 = min distance from xi to the depth-N postsingular cloud together
// with the declared boundary singularities, capped. Validated by
// continuing random inverse branches from xi out to the 0.9 rho0 circle.
inline WellDefinednessEstimate well_definedness_radius(const MapDescriptor& g, Complex xi,
                                                       int depth, RadiusOptions opt = {}) {
    if (!on_unit_circle(xi))
        throw config_error("well_definedness_radius: xi must lie on the unit circle");
    xi /= std::abs(xi);
    WellDefinednessEstimate est;
    est.xi = xi;
    est.depth = depth;

    const auto cloud = postsingular_approx(g, depth);
    est.cloud_reached_infinity = cloud.reached_infinity;
    est.cloud_size = cloud.points.size();
    double rho = opt.cap;
    for (const Complex p : cloud.points) rho = std::min(rho, std::abs(xi - p));
    for (const Complex s : g.declared_singularities) rho = std::min(rho, std::abs(xi - s));
    if (rho < 1e-8) {
        est.rho0 = 0.0;
        est.degenerate = true;
        return est;
    }
    est.rho0 = rho;

    // Random-branch certification at radius 0.9 rho0.
    est.validation_radius = 0.9 * rho;
    SplitMix64 rng(opt.seed);
    bool all_ok = true;
    for (int i = 0; i < opt.validation_count; ++i) {
        const int n = 1 + static_cast<int>(rng.uniform() * depth);
        std::vector<int> choices;
        for (int k = 0; k < n; ++k) choices.push_back(static_cast<int>(rng.uniform() * 64.0));
        // map raw picks into range lazily: preimage counts vary per level
        std::vector<int> bounded;
        Complex cur = xi;
        for (int k = 0; k < n; ++k) {
            const auto pre = preimages(g, cur);
            if (pre.empty()) {
                all_ok = false;
                break;
            }
            const int pick = choices[static_cast<std::size_t>(k)] % static_cast<int>(pre.size());
            bounded.push_back(pick);
            cur = pre[static_cast<std::size_t>(pick)].value;
        }
        if (!all_ok) break;
        auto chain = branch_chain_by_choices(g, xi, bounded);
        const Complex target = xi + est.validation_radius * rng.unit_vector();
        const auto res = continue_branch(chain, target);
        if (!res.completed) {
            all_ok = false;
            break;
        }
        ++est.validation_chains;
    }
    est.validated = all_ok && est.validation_chains == opt.validation_count;
    return est;
}

// ---- radial segment containment -------------------------------------------------

struct ContainmentReport {
    bool contained = false;
    double max_angle = 0.0;      // largest generalized angle seen at the branch image
    int samples = 0;
    int obstructions = 0;
    Complex branch_vertex{0.0, 0.0};  // G_n(xi)
};

// Pushes a radial segment at xi through the depth-n inverse branch that
// follows xi's own backward orbit (nearest-preimage selection) and tests
// membership in the Stolz angle at the branch image of xi.
inline ContainmentReport stolz_containment_check(const MapDescriptor& g, Complex xi, Complex p,
                                                 double alpha, double rho, int depth,
                                                 int samples = 64) {
    if (!on_unit_circle(xi))
        throw config_error("stolz_containment_check: xi must lie on the unit circle");
    if (samples < 1) throw config_error("stolz_containment_check: need at least one sample");
    xi /= std::abs(xi);
    ContainmentReport rep;
    rep.samples = samples;

    const std::vector<int> nearest(static_cast<std::size_t>(depth), -1);
    auto chain = branch_chain_by_choices(g, xi, nearest);
    Complex vertex = chain.anchor.front();
    if (std::abs(vertex) > 1e-9) vertex /= std::abs(vertex);  // boundary point up to rounding
    rep.branch_vertex = vertex;

    RadialSegmentSpec seg{xi, p, rho};
    const auto pts = radial_segment_points(seg, samples);
    StolzAngleSpec wedge{vertex, p, alpha, rho};
    bool all_in = true;
    for (const Complex s : pts) {
        const auto res = continue_branch(chain, s);
        if (!res.completed) {
            ++rep.obstructions;
            all_in = false;
            continue;
        }
        const double ang = generalized_stolz_angle(vertex, p, res.value);
        rep.max_angle = std::max(rep.max_angle, ang);
        if (!in_stolz_angle(wedge, res.value)) all_in = false;
    }
    rep.contained = all_in;
    return rep;
}

struct ContainmentRadiusReport {
    double rho1 = 0.0;           // bisected empirical radius
    double analytic_rho = 0.0;   // radius from the distortion-constant bound
    double analytic_constant = 0.0;  // C(rho1/rho0)/(1 - C(rho1/rho0))
    double rho0 = 0.0;
    bool found = false;
};

// Bisection for the largest rho <= 0.9 rho0 with containment at every
// depth up to N. The closed-form radius from the linearization bound
// (sufficient, not sharp) is reported alongside for comparison.
inline ContainmentRadiusReport find_containment_radius(const MapDescriptor& g, Complex xi,
                                                       Complex p, double alpha, int max_depth,
                                                       int samples = 32, int bisection_steps = 20) {
    const auto est = well_definedness_radius(g, xi, max_depth);
    ContainmentRadiusReport rep;
    rep.rho0 = est.rho0;
    if (est.degenerate || est.rho0 <= 0.0) return rep;

    auto contained_at = [&](double rho) {
        for (int n = 1; n <= max_depth; ++n) {
            const auto r = stolz_containment_check(g, xi, p, alpha, rho, n, samples);
            if (!r.contained) return false;
        }
        return true;
    };
    double lo = 0.0, hi = 0.9 * est.rho0;
    if (contained_at(hi)) {
        rep.rho1 = hi;
        rep.found = true;
    } else {
        double step = hi;
        for (int i = 0; i < bisection_steps; ++i) {
            step *= 0.5;
            const double mid = lo + step;
            if (mid >= hi) continue;
            if (contained_at(mid)) lo = mid;
        }
        rep.rho1 = lo;
        rep.found = lo > 0.0;
    }
    const double t = std::tan(alpha) / (1.0 + std::tan(alpha));
    rep.analytic_rho = est.rho0 * (1.0 - 1.0 / std::sqrt(1.0 + t));
    if (rep.rho1 > 0.0 && rep.rho1 < rep.rho0) {
        const double c = distortion_constant(rep.rho1 / rep.rho0);
        rep.analytic_constant = (c < 1.0) ? c / (1.0 - c) : std::numeric_limits<double>::infinity();
    }
    return rep;
}

// ---- reflection across the circle -----------------------------------------------

// Extension of an inner map beyond the circle: z outside the closed disk
// maps to 1/conj(g(1/conj(z))).
inline Complex schwarz_reflection_value(const MapDescriptor& g, Complex z) {
    if (std::abs(z) <= 1.0)
        throw config_error("schwarz_reflection_value: point must lie outside the closed disk");
    const Complex mirror = 1.0 / std::conj(z);
    for (const Complex s : g.declared_singularities)
        if (std::abs(mirror - s) < 1e-12)
            throw numeric_error("schwarz_reflection_value: reflection lands on a boundary singularity");
    const Complex inner = evaluate(g, mirror);
    if (std::abs(inner) < 1e-300)
        throw numeric_error("schwarz_reflection_value: reflected value at a zero of the map");
    return 1.0 / std::conj(inner);
}

} // namespace innerdyn
