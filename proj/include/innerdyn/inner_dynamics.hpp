#pragma once
#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "innerdyn/error.hpp"
#include "innerdyn/hyperbolic.hpp"
#include "innerdyn/maps.hpp"
#include "innerdyn/moebius.hpp"
#include "innerdyn/rng.hpp"
#include "innerdyn/sphere.hpp"
#include "innerdyn/stolz.hpp"

namespace innerdyn {

// ---- Denjoy-Wolff ----------------------------------------------------------

struct DenjoyWolffResult {
    Complex point{0.0, 0.0};
    bool on_boundary = false;
    Complex multiplier{0.0, 0.0};  // f'(p); at a boundary point the angular derivative
    double residual = 0.0;         // |f(p) - p|
    int iterations = 0;
};

struct DenjoyWolffOptions {
    int orbit_steps = 20000;
    int newton_steps = 60;
    double interior_band = 1e-6;  // |p| below 1 - band counts as interior
};

namespace detail {

// Fixed points of a half-plane Moebius map, on the boundary or inside;
// closed form, including the point at infinity.
inline std::vector<ExtendedComplex> halfplane_fixed_points(const MoebiusTransform& t) {
    std::vector<ExtendedComplex> out;
    if (std::abs(t.c) < 1e-15) {
        out.push_back(ExtendedComplex::infinity());
        if (std::abs(t.a - t.d) > 1e-15)
            out.push_back(ExtendedComplex::of(t.b / (t.d - t.a)));
        return out;
    }
    const Complex disc = std::sqrt((t.a - t.d) * (t.a - t.d) + 4.0 * t.b * t.c);
    out.push_back(ExtendedComplex::of(((t.a - t.d) + disc) / (2.0 * t.c)));
    out.push_back(ExtendedComplex::of(((t.a - t.d) - disc) / (2.0 * t.c)));
    return out;
}

// Arg(f(e^{i theta}) e^{-i theta}); zero exactly at boundary fixed points.
inline double boundary_defect(const MapDescriptor& f, double theta) {
    const Complex xi = std::polar(1.0, theta);
    const Complex w = evaluate(f, xi);
    return std::arg(w * std::conj(xi));
}

} // namespace detail

inline DenjoyWolffResult denjoy_wolff(const MapDescriptor& f, DenjoyWolffOptions opt = {}) {
    DenjoyWolffResult r;

    if (f.kind == MapKind::halfplane_moebius_model) {
        // Closed form through the model chart. Candidates are the Moebius
        // fixed points; the one with |f'| <= 1 in disk coordinates wins.
        const auto C = disk_to_halfplane(Complex{1.0, 0.0});
        const auto Cinv = moebius_inverse(C);
        DenjoyWolffResult best;
        double best_mult = 1e300;
        for (const auto& w : detail::halfplane_fixed_points(f.halfplane_model)) {
            Complex zeta;
            bool interior = false;
            if (w.infinite) {
                zeta = Complex{1.0, 0.0};
            } else if (w.value.imag() > 1e-12) {
                zeta = moebius_apply(Cinv, w.value);
                interior = true;
            } else {
                zeta = moebius_apply(Cinv, Complex{w.value.real(), 0.0});
                zeta /= std::abs(zeta);
            }
            const Complex mult = derivative(f, zeta);
            if (interior && std::abs(mult) <= 1.0 + 1e-9) {
                r.point = zeta;
                r.on_boundary = false;
                r.multiplier = mult;
                r.residual = std::abs(evaluate(f, zeta) - zeta);
                return r;
            }
            if (!interior && std::abs(mult) < best_mult) {
                best_mult = std::abs(mult);
                best.point = zeta;
                best.on_boundary = true;
                best.multiplier = mult;
                best.residual = std::abs(evaluate(f, zeta) - zeta);
            }
        }
        if (best_mult > 1.0 + 1e-6)
            throw numeric_error("denjoy_wolff: no non-expanding fixed point found");
        return best;
    }

    // Generic route: follow an interior orbit.
    const Complex seeds[] = {Complex{0.0, 0.0}, Complex{0.31, 0.17}, Complex{-0.22, -0.4}};
    OrbitResult chosen;
    bool have = false;
    for (const Complex s : seeds) {
        OrbitOptions oo;
        oo.max_steps = opt.orbit_steps;
        oo.convergence_tol = 1e-13;
        const auto o = orbit(f, s, oo);
        if (o.status == OrbitStatus::converged || o.status == OrbitStatus::budget_exhausted) {
            chosen = o;
            have = true;
            if (o.status == OrbitStatus::converged) break;
        }
    }
    if (!have) throw numeric_error("denjoy_wolff: interior orbits did not settle");

    Complex p = chosen.terminal;
    if (std::abs(p) < 1.0 - opt.interior_band) {
        // Interior fixed point; Newton polish on f(z) - z.
        for (int i = 0; i < opt.newton_steps; ++i) {
            const Complex g = evaluate(f, p) - p;
            const Complex dg = derivative(f, p) - 1.0;
            if (std::abs(dg) < 1e-14) break;
            const Complex step = g / dg;
            p -= step;
            ++r.iterations;
            if (std::abs(step) < 1e-15) break;
        }
        r.point = p;
        r.on_boundary = false;
        r.multiplier = derivative(f, p);
        r.residual = std::abs(evaluate(f, p) - p);
        if (std::abs(r.multiplier) > 1.0 + 1e-9)
            throw numeric_error("denjoy_wolff: interior orbit limit is not non-expanding");
        return r;
    }

    // Orbit drifts to the circle: refine the landing angle by Newton on the
    // boundary defect.
    double theta = std::arg(chosen.points.back());
    for (int i = 0; i < opt.newton_steps; ++i) {
        const double d = detail::boundary_defect(f, theta);
        const double h = 1e-7;
        const double dd =
            (detail::boundary_defect(f, theta + h) - detail::boundary_defect(f, theta - h)) /
            (2.0 * h);
        if (std::abs(dd) < 1e-14) break;
        const double step = d / dd;
        theta -= step;
        ++r.iterations;
        if (std::abs(step) < 1e-15) break;
    }
    const Complex xi = std::polar(1.0, theta);
    r.point = xi;
    r.on_boundary = true;
    r.multiplier = derivative(f, xi);
    r.residual = std::abs(evaluate(f, xi) - xi);
    if (r.residual > 1e-8)
        throw numeric_error("denjoy_wolff: boundary refinement did not close the fixed point");
    return r;
}

// ---- orbit step sequences and classification -------------------------------

enum class CowenClass { elliptic, hyperbolic, simply_parabolic, doubly_parabolic };

inline const char* cowen_class_name(CowenClass c) {
    switch (c) {
        case CowenClass::elliptic: return "elliptic";
        case CowenClass::hyperbolic: return "hyperbolic";
        case CowenClass::simply_parabolic: return "simply_parabolic";
        case CowenClass::doubly_parabolic: return "doubly_parabolic";
    }
    return "?";
}

// Hyperbolic lengths of successive orbit steps. Model charts iterate in
// half-plane coordinates where the distances carry no near-boundary
// cancellation; other kinds iterate in the disk and stop at the float floor.
inline std::vector<double> hyperbolic_step_sequence(const MapDescriptor& f, int n_steps,
                                                    Complex z0 = {0.0, 0.0}) {
    if (n_steps < 1) throw config_error("hyperbolic_step_sequence: need at least one step");
    std::vector<double> steps;
    steps.reserve(static_cast<std::size_t>(n_steps));
    if (f.kind == MapKind::halfplane_moebius_model) {
        const auto C = disk_to_halfplane(Complex{1.0, 0.0});
        Complex w = moebius_apply(C, z0);
        for (int n = 0; n < n_steps; ++n) {
            const auto next = moebius_apply(f.halfplane_model, ExtendedComplex::of(w));
            if (next.infinite || !finite_number(next.value) || std::abs(next.value) > 1e100 ||
                next.value.imag() <= 0.0)
                break;
            steps.push_back(hyperbolic_distance_halfplane(w, next.value));
            w = next.value;
        }
        return steps;
    }
    Complex z = z0;
    for (int n = 0; n < n_steps; ++n) {
        const Complex next = evaluate(f, z);
        if (std::abs(next) >= 1.0 - 1e-12 || std::abs(z - next) == 0.0) break;
        steps.push_back(hyperbolic_distance_disk(z, next));
        z = next;
    }
    return steps;
}

struct CowenClassification {
    CowenClass type = CowenClass::elliptic;
    DenjoyWolffResult dw;
    std::vector<double> steps;     // hyperbolic step lengths along the probe orbit
    double step_limit = 0.0;       // tail estimate of the step length
};

struct ClassifyOptions {
    int n_steps = 5000;
    double parabolic_band = 1e-6;  // |multiplier| within this of 1 counts parabolic
};

inline CowenClassification cowen_classify(const MapDescriptor& f, ClassifyOptions opt = {}) {
    CowenClassification out;
    out.dw = denjoy_wolff(f);
    if (!out.dw.on_boundary) {
        out.type = CowenClass::elliptic;
        return out;
    }
    const double mult = std::abs(out.dw.multiplier);
    if (mult < 1.0 - opt.parabolic_band) {
        out.type = CowenClass::hyperbolic;
        out.steps = hyperbolic_step_sequence(f, std::min(opt.n_steps, 200));
        if (!out.steps.empty()) out.step_limit = out.steps.back();
        return out;
    }
    // Parabolic: separate by whether the orbit step length dies out.
    out.steps = hyperbolic_step_sequence(f, opt.n_steps);
    if (out.steps.size() < 16)
        throw numeric_error("cowen_classify: step sequence too short to resolve the parabolic type");
    const double tail = out.steps.back();
    const double quarter = out.steps[out.steps.size() / 4];
    out.step_limit = tail;
    if (tail < 1e-6 || tail < 0.5 * quarter) out.type = CowenClass::doubly_parabolic;
    else out.type = CowenClass::simply_parabolic;
    return out;
}

// ---- step-decay recurrence test --------------------------------------------

struct RecurrenceCheck {
    bool satisfied = false;
    double fitted_constant = 0.0;  // K in s_n ~ scale/n + K/n^2
    double max_residual = 0.0;
    double scale = 1.0;
    int n_lo = 0, n_hi = 0;
};

// Tests whether the orbit step lengths follow scale/n + K/n^2 up to a
// uniform residual, the decay envelope under which the boundary orbit
// returns to every neighbourhood of the fixed point.
inline RecurrenceCheck recurrence_criterion_check(const MapDescriptor& f, double scale = 1.0,
                                                  int n_lo = 100, int n_hi = 10000,
                                                  double residual_tol = 1e-3) {
    if (n_lo < 1 || n_hi <= n_lo) throw config_error("recurrence_criterion_check: bad index range");
    RecurrenceCheck r;
    r.scale = scale;
    r.n_lo = n_lo;
    r.n_hi = n_hi;
    const auto steps = hyperbolic_step_sequence(f, n_hi);
    if (static_cast<int>(steps.size()) < n_hi)
        throw numeric_error("recurrence_criterion_check: orbit left the workable region early");
    // Least squares for K against the 1/n^2 shape.
    double num = 0.0, den = 0.0;
    for (int n = n_lo; n <= n_hi; ++n) {
        const double e = steps[static_cast<std::size_t>(n - 1)] - scale / n;
        const double b = 1.0 / (static_cast<double>(n) * n);
        num += e * b;
        den += b * b;
    }
    r.fitted_constant = (den > 0.0) ? num / den : 0.0;
    double worst = 0.0;
    for (int n = n_lo; n <= n_hi; ++n) {
        const double e = steps[static_cast<std::size_t>(n - 1)] - scale / n -
                         r.fitted_constant / (static_cast<double>(n) * n);
        worst = std::max(worst, std::abs(e));
    }
    r.max_residual = worst;
    r.satisfied = worst < residual_tol;
    return r;
}

// ---- radial limits ----------------------------------------------------------

struct RadialLimitResult {
    Complex value{0.0, 0.0};
    bool converged = false;
    bool unimodular = false;
    bool interior_value = false;  // converged but |value| < 1: flagged, not silent
    double residual = 0.0;        // spread of the last accelerated values
    int samples_used = 0;
    std::string note;
};

struct RadialLimitOptions {
    int max_depth = 48;   // samples at t_k = 1 - 2^-k
    int min_depth = 6;
    double tol = 1e-9;
};

// Limit of f along the radius toward xi, accelerated with Aitken's delta
// squared. When the limit exists but is interior the result says so
// explicitly; that outcome marks xi as beyond the reach of unrestricted
// boundary extension.
inline RadialLimitResult radial_limit(const MapDescriptor& f, Complex xi,
                                      RadialLimitOptions opt = {}) {
    if (!on_unit_circle(xi)) throw config_error("radial_limit: xi must lie on the unit circle");
    xi /= std::abs(xi);
    RadialLimitResult r;
    std::vector<Complex> raw;
    for (int k = 2; k <= opt.max_depth; ++k) {
        const double t = 1.0 - std::pow(2.0, -k);
        Complex v;
        try {
            v = evaluate(f, t * xi);
        } catch (const numeric_error&) {
            break;  // cannot sample deeper; judge on what we have
        }
        raw.push_back(v);
        r.samples_used = static_cast<int>(raw.size());
        if (static_cast<int>(raw.size()) >= opt.min_depth) {
            // Aitken on the last three raw values.
            const Complex x0 = raw[raw.size() - 3], x1 = raw[raw.size() - 2], x2 = raw.back();
            const Complex d2 = x2 - 2.0 * x1 + x0;
            const Complex acc = (std::abs(d2) > 1e-300) ? x2 - (x2 - x1) * (x2 - x1) / d2 : x2;
            const double jump = std::abs(acc - r.value);
            r.value = acc;
            if (static_cast<int>(raw.size()) > opt.min_depth && jump < opt.tol) {
                r.converged = true;
                r.residual = jump;
                break;
            }
            r.residual = jump;
        }
    }
    if (raw.empty()) throw numeric_error("radial_limit: no radial samples were computable");
    if (!r.converged && r.samples_used >= opt.min_depth && r.residual < std::sqrt(opt.tol)) {
        // settled slowly; accept with the looser residual on record
        r.converged = true;
    }
    if (r.converged) {
        r.unimodular = std::abs(std::abs(r.value) - 1.0) < 1e-6;
        if (!r.unimodular) {
            r.interior_value = true;
            r.note = "radial limit exists but lies inside the disk";
        }
    } else {
        r.note = "radial samples did not settle";
    }
    return r;
}

// ---- circle dynamics --------------------------------------------------------

// One application of the boundary map in angle coordinates. Evaluated
// through the complex map, never by exact angle arithmetic; the libm
// rounding keeps long iterations from collapsing onto dyadic orbits.
inline double boundary_circle_map(const MapDescriptor& f, double theta) {
    const Complex z = std::polar(1.0, theta);
    const Complex w = evaluate(f, z);
    const double mod = std::abs(w);
    if (std::abs(mod - 1.0) > 1e-6)
        throw numeric_error("boundary_circle_map: image left the unit circle");
    return std::arg(w);
}

struct CircleLift {
    std::vector<double> theta;   // partition of [0, 2pi)
    std::vector<double> lifted;  // continuous lift of arg f(e^{i theta})
    int degree = 0;              // winding number of the boundary map
};

inline CircleLift circle_map_lift(const MapDescriptor& f, int partition = 4096) {
    if (partition < 16) throw config_error("circle_map_lift: partition too coarse");
    CircleLift out;
    out.theta.reserve(static_cast<std::size_t>(partition) + 1);
    out.lifted.reserve(static_cast<std::size_t>(partition) + 1);
    const double tau = 6.283185307179586476925286766559;
    double prev = boundary_circle_map(f, 0.0);
    double offset = 0.0;
    out.theta.push_back(0.0);
    out.lifted.push_back(prev);
    for (int i = 1; i <= partition; ++i) {
        const double th = tau * i / partition;
        double v = boundary_circle_map(f, th);
        // unwrap against the previous principal value
        while (v + offset < prev - 3.141592653589793) offset += tau;
        while (v + offset > prev + 3.141592653589793) offset -= tau;
        prev = v + offset;
        out.theta.push_back(th);
        out.lifted.push_back(prev);
    }
    out.degree = static_cast<int>(std::llround((out.lifted.back() - out.lifted.front()) / tau));
    return out;
}

struct ErgodicityReport {
    int iterations = 0;
    double ks_statistic = 0.0;
    double ks_threshold = 0.0;  // 1% critical value
    bool ks_pass = false;
    double chi2 = 0.0;
    double chi2_threshold = 0.0;  // 99% quantile of chi^2 with bins-1 dof
    int bins = 0;
    bool chi2_pass = false;
    double max_gap = 0.0;
    int arc_returns = 0;
    double expected_arc_returns = 0.0;
};

struct ErgodicityOptions {
    int iterations = 1000000;
    int bins = 64;
    double return_arc = 0.09817477042468103;  // 2 pi / 64
};

// Long boundary orbit statistics against the uniform law: Kolmogorov-
// Smirnov on the empirical angles, chi-square over equal bins, returns to
// a small arc at the seed, and the largest empty gap.
inline ErgodicityReport ergodicity_experiment(const MapDescriptor& f, double theta0,
                                              ErgodicityOptions opt = {}) {
    if (opt.iterations < 1000) throw config_error("ergodicity_experiment: too few iterations");
    if (opt.bins < 2) throw config_error("ergodicity_experiment: need at least two bins");
    ErgodicityReport rep;
    rep.iterations = opt.iterations;
    rep.bins = opt.bins;
    const double tau = 6.283185307179586476925286766559;

    std::vector<double> unit(static_cast<std::size_t>(opt.iterations));
    std::vector<int> counts(static_cast<std::size_t>(opt.bins), 0);
    Complex z = std::polar(1.0, theta0);
    const double half_arc = 0.5 * opt.return_arc;
    for (int n = 0; n < opt.iterations; ++n) {
        z = evaluate(f, z);
        z /= std::abs(z);  // stay on the circle; drift is rounding-level
        double u = std::arg(z) / tau;
        if (u < 0.0) u += 1.0;
        if (u >= 1.0) u -= 1.0;
        unit[static_cast<std::size_t>(n)] = u;
        int b = static_cast<int>(u * opt.bins);
        if (b >= opt.bins) b = opt.bins - 1;
        ++counts[static_cast<std::size_t>(b)];
        double diff = std::abs(std::arg(z) - theta0);
        if (diff > 3.141592653589793) diff = tau - diff;
        if (diff < half_arc) ++rep.arc_returns;
    }
    rep.expected_arc_returns = opt.iterations * opt.return_arc / tau;

    std::sort(unit.begin(), unit.end());
    double d = 0.0;
    const double n = static_cast<double>(opt.iterations);
    for (int i = 0; i < opt.iterations; ++i) {
        const double u = unit[static_cast<std::size_t>(i)];
        d = std::max(d, std::abs(u - i / n));
        d = std::max(d, std::abs((i + 1) / n - u));
    }
    rep.ks_statistic = d;
    rep.ks_threshold = 1.6276236115189504 / std::sqrt(n);  // sqrt(-ln(0.005)/2)
    rep.ks_pass = d < rep.ks_threshold;

    const double expected = n / opt.bins;
    double chi2 = 0.0;
    for (int b = 0; b < opt.bins; ++b) {
        const double o = counts[static_cast<std::size_t>(b)];
        chi2 += (o - expected) * (o - expected) / expected;
    }
    rep.chi2 = chi2;
    // Wilson-Hilferty approximation of the 99% chi-square quantile.
    const double df = opt.bins - 1;
    const double zq = 2.3263478740408408;
    const double h = 2.0 / (9.0 * df);
    rep.chi2_threshold = df * std::pow(1.0 - h + zq * std::sqrt(h), 3.0);
    rep.chi2_pass = chi2 < rep.chi2_threshold;

    double gap = unit.front() + 1.0 - unit.back();  // wraparound gap
    for (std::size_t i = 1; i < unit.size(); ++i) gap = std::max(gap, unit[i] - unit[i - 1]);
    rep.max_gap = gap;
    return rep;
}

// ---- boundary singularity probes ---------------------------------------------

struct SingularityProbe {
    Complex xi{1.0, 0.0};
    double min_modulus = 1.0;     // smallest |f| seen in the crosscut lens
    double small_fraction = 0.0;  // fraction of lens samples with |f| < 0.5
    int samples = 0;
    bool singular = false;
};

struct SingularityProbeOptions {
    double diameter = 0.05;
    int samples = 100000;
    std::uint64_t seed = 1;
    double small_level = 0.5;
    double fraction_threshold = 0.002;
    double modulus_threshold = 0.05;
};

// Density evidence that xi carries a boundary singularity: zeros of f
// accumulate there exactly when every crosscut lens at xi contains points
// where |f| collapses. Samples the lens uniformly and applies fixed
// thresholds on the small-value fraction and the observed minimum.
inline SingularityProbe singularity_probe(const MapDescriptor& f, Complex xi,
                                          SingularityProbeOptions opt = {}) {
    if (!on_unit_circle(xi)) throw config_error("singularity_probe: xi must lie on the unit circle");
    if (!(opt.diameter > 0.0) || opt.diameter >= 2.0)
        throw config_error("singularity_probe: diameter must be in (0, 2)");
    xi /= std::abs(xi);
    SingularityProbe p;
    p.xi = xi;
    SplitMix64 rng(opt.seed);
    int small = 0, accepted = 0;
    long attempts = 0;
    const long max_attempts = 40L * opt.samples;
    while (accepted < opt.samples && attempts < max_attempts) {
        ++attempts;
        const Complex z{xi.real() + opt.diameter * (2.0 * rng.uniform() - 1.0),
                        xi.imag() + opt.diameter * (2.0 * rng.uniform() - 1.0)};
        if (std::abs(z - xi) >= opt.diameter || std::abs(z) >= 1.0) continue;
        ++accepted;
        double m;
        try {
            m = std::abs(evaluate(f, z));
        } catch (const numeric_error&) {
            m = 0.0;  // blow-up counts as singular behavior in the lens
        }
        p.min_modulus = std::min(p.min_modulus, m);
        if (m < opt.small_level) ++small;
    }
    if (accepted < opt.samples / 2)
        throw numeric_error("singularity_probe: lens sampling starved");
    p.samples = accepted;
    p.small_fraction = static_cast<double>(small) / accepted;
    p.singular = p.small_fraction > opt.fraction_threshold && p.min_modulus < opt.modulus_threshold;
    return p;
}

} // namespace innerdyn
