#pragma once
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "innerdyn/error.hpp"
#include "innerdyn/moebius.hpp"
#include "innerdyn/poly.hpp"
#include "innerdyn/rng.hpp"
#include "innerdyn/sphere.hpp"

namespace innerdyn {

enum class MapKind {
    power,
    polynomial,
    rational,
    finite_blaschke,
    infinite_blaschke,
    halfplane_moebius_model,
    baker_exp,
    newton_of_polynomial,
};

inline const char* map_kind_name(MapKind k) {
    switch (k) {
        case MapKind::power: return "power";
        case MapKind::polynomial: return "polynomial";
        case MapKind::rational: return "rational";
        case MapKind::finite_blaschke: return "finite_blaschke";
        case MapKind::infinite_blaschke: return "infinite_blaschke";
        case MapKind::halfplane_moebius_model: return "halfplane_moebius_model";
        case MapKind::baker_exp: return "baker_exp";
        case MapKind::newton_of_polynomial: return "newton_of_polynomial";
    }
    return "?";
}

// Zero schedule for infinite products. Zeros are real, increasing, in (0,1),
// accumulating at 1. The geometric family a_k = 1 - c q^k carries a closed
// tail formula; the callback form exists for condition checking and carries
// no tail certificate.
struct BlaschkeZeroRule {
    enum class Type { geometric, callback } type = Type::geometric;
    double c = 1.0;
    double q = 0.5;
    std::function<double(int)> fn;  // k >= 1 -> a_k

    double zero(int k) const {
        if (type == Type::geometric) return 1.0 - c * std::pow(q, k);
        return fn(k);
    }
    // sum_{j > k} (1 - a_j); only the geometric family certifies its tail.
    double geometric_tail(int k) const { return c * std::pow(q, k + 1) / (1.0 - q); }
};

struct MapDescriptor {
    MapKind kind = MapKind::power;
    std::string label;

    int power_degree = 2;                       // power
    Poly num{Complex{0.0, 0.0}, Complex{1.0, 0.0}};  // polynomial / rational numerator
    Poly den{Complex{1.0, 0.0}};                // rational denominator
    std::vector<Complex> blaschke_zeros;        // finite_blaschke
    Complex rotation{1.0, 0.0};                 // finite_blaschke
    BlaschkeZeroRule zero_rule;                 // infinite_blaschke
    MoebiusTransform halfplane_model;           // acts on the upper half-plane
    MoebiusTransform disk_model;                // cached disk conjugate of the above
    Poly newton_target;                         // newton_of_polynomial

    // Declared singular data. E(f): non-removable boundary singularities on
    // the plane plus, for entire transcendental entries, the essential
    // point at infinity.
    std::vector<Complex> declared_singularities;
    bool essential_at_infinity = false;
    std::vector<ExtendedComplex> declared_asymptotic_values;

    // Invariant-component metadata for the tracked Fatou component.
    std::vector<Complex> attractors;
    std::optional<Complex> boundary_repeller;
};

namespace detail {

inline Complex pow_int(Complex z, int n) {
    Complex acc{1.0, 0.0};
    Complex base = z;
    int e = n;
    while (e > 0) {
        if (e & 1) acc *= base;
        base *= base;
        e >>= 1;
    }
    return acc;
}

// Adaptive truncation of the infinite product. Returns the factor count
// needed so the neglected tail perturbs the value by less than ~1e-12,
// or throws when z is too close to the accumulation point 1.
inline int infinite_blaschke_depth(const BlaschkeZeroRule& rule, Complex z) {
    const double gap = std::abs(1.0 - z);
    if (gap < 1e-14)
        throw numeric_error("infinite_blaschke: evaluation at the singular boundary point");
    if (rule.type == BlaschkeZeroRule::Type::geometric) {
        const double top = 2.0 * (1.0 + std::abs(z));
        for (int k = 8; k <= 4000; ++k) {
            if (1.0 - rule.zero(k) < 0.25 * gap &&
                rule.geometric_tail(k) * top / gap < 1e-12)
                return k;
        }
        throw numeric_error("infinite_blaschke: truncation depth exhausted near the singularity");
    }
    // No tail certificate: demand the raw factor deficit be negligible.
    for (int k = 8; k <= 100000; ++k) {
        if ((1.0 - rule.fn(k)) * 2.0 / gap < 1e-15) return k;
    }
    throw numeric_error("infinite_blaschke: callback rule tail does not certify");
}

inline Complex infinite_blaschke_eval(const BlaschkeZeroRule& rule, Complex z) {
    const int depth = infinite_blaschke_depth(rule, z);
    Complex prod{1.0, 0.0};
    for (int k = 1; k <= depth; ++k) {
        const double a = rule.zero(k);
        const Complex denom = 1.0 - a * z;
        if (std::abs(denom) < 1e-300)
            throw numeric_error("infinite_blaschke: evaluation at a factor pole");
        prod *= (a - z) / denom;
        if (std::abs(prod) == 0.0) return prod;  // landed exactly on a zero
    }
    return prod;
}

inline Complex infinite_blaschke_derivative(const BlaschkeZeroRule& rule, Complex z) {
    const int depth = infinite_blaschke_depth(rule, z);
    std::vector<Complex> factor(static_cast<std::size_t>(depth));
    std::vector<Complex> dfactor(static_cast<std::size_t>(depth));
    for (int k = 1; k <= depth; ++k) {
        const double a = rule.zero(k);
        const Complex denom = 1.0 - a * z;
        if (std::abs(denom) < 1e-300)
            throw numeric_error("infinite_blaschke: derivative at a factor pole");
        factor[static_cast<std::size_t>(k - 1)] = (a - z) / denom;
        dfactor[static_cast<std::size_t>(k - 1)] = (a * a - 1.0) / (denom * denom);
    }
    // Product rule with prefix/suffix accumulation.
    const std::size_t n = factor.size();
    std::vector<Complex> suffix(n + 1, Complex{1.0, 0.0});
    for (std::size_t i = n; i-- > 0;) suffix[i] = factor[i] * suffix[i + 1];
    Complex prefix{1.0, 0.0};
    Complex sum{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        sum += prefix * dfactor[i] * suffix[i + 1];
        prefix *= factor[i];
    }
    return sum;
}

inline std::pair<Complex, Complex> finite_blaschke_eval2(const std::vector<Complex>& zeros,
                                                         Complex rotation, Complex z) {
    const std::size_t n = zeros.size();
    std::vector<Complex> factor(n), dfactor(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Complex a = zeros[i];
        const Complex denom = 1.0 - std::conj(a) * z;
        if (std::abs(denom) < 1e-300)
            throw numeric_error("finite_blaschke: evaluation at a factor pole");
        factor[i] = (z - a) / denom;
        dfactor[i] = (1.0 - std::norm(a)) / (denom * denom);
    }
    std::vector<Complex> suffix(n + 1, Complex{1.0, 0.0});
    for (std::size_t i = n; i-- > 0;) suffix[i] = factor[i] * suffix[i + 1];
    Complex value = rotation * suffix[0];
    Complex prefix{1.0, 0.0};
    Complex deriv{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
        deriv += prefix * dfactor[i] * suffix[i + 1];
        prefix *= factor[i];
    }
    return {value, rotation * deriv};
}

} // namespace detail

inline Complex evaluate(const MapDescriptor& f, Complex z);
inline Complex derivative(const MapDescriptor& f, Complex z);

namespace detail {

inline void derivative_self_test(const MapDescriptor& f, const std::function<Complex(SplitMix64&)>& sample) {
    SplitMix64 rng(0x5EEDF00Dull);
    int accepted = 0, attempts = 0;
    while (accepted < 100 && attempts < 2000) {
        ++attempts;
        const Complex z = sample(rng);
        const double h = 1e-5 * (1.0 + std::abs(z));
        Complex d, fw, bw, up, dn;
        try {
            d = derivative(f, z);
            fw = evaluate(f, z + h);
            bw = evaluate(f, z - h);
            up = evaluate(f, z + Complex{0.0, h});
            dn = evaluate(f, z - Complex{0.0, h});
        } catch (const numeric_error&) {
            continue;  // sampled too close to a pole or singularity, draw again
        }
        const Complex fd_re = (fw - bw) / (2.0 * h);
        const Complex fd_im = (up - dn) / (2.0 * h * Complex{0.0, 1.0});
        const Complex fd = 0.5 * (fd_re + fd_im);
        const double scale = std::abs(d) + std::abs(fd);
        if (scale < 1e-8) continue;  // too flat for a relative comparison
        if (std::abs(d - fd) > 1e-6 * scale)
            throw config_error(std::string("map '") + map_kind_name(f.kind) +
                               "': derivative disagrees with central differences");
        ++accepted;
    }
    if (accepted < 50)
        throw config_error(std::string("map '") + map_kind_name(f.kind) +
                           "': could not sample enough points for the derivative self-test");
}

inline std::function<Complex(SplitMix64&)> default_sampler(const MapDescriptor& f) {
    switch (f.kind) {
        case MapKind::power:
        case MapKind::finite_blaschke:
        case MapKind::infinite_blaschke:
        case MapKind::halfplane_moebius_model:
            return [](SplitMix64& g) { return g.in_disk(0.95); };
        case MapKind::baker_exp:
            return [](SplitMix64& g) {
                return Complex{g.uniform(-3.0, 6.0), g.uniform(-6.0, 6.0)};
            };
        default:
            return [](SplitMix64& g) { return g.in_disk(2.0); };
    }
}

} // namespace detail

inline Complex evaluate(const MapDescriptor& f, Complex z) {
    switch (f.kind) {
        case MapKind::power:
            return detail::pow_int(z, f.power_degree);
        case MapKind::polynomial:
            return poly_eval(f.num, z);
        case MapKind::rational:
        case MapKind::newton_of_polynomial: {
            const Complex q = poly_eval(f.den, z);
            const Complex p = poly_eval(f.num, z);
            if (std::abs(q) == 0.0 || std::abs(p) > kOverflowGuard * std::abs(q))
                throw numeric_error("rational: evaluation at a pole");
            return p / q;
        }
        case MapKind::finite_blaschke:
            return detail::finite_blaschke_eval2(f.blaschke_zeros, f.rotation, z).first;
        case MapKind::infinite_blaschke:
            return detail::infinite_blaschke_eval(f.zero_rule, z);
        case MapKind::halfplane_moebius_model: {
            const auto w = moebius_apply(f.disk_model, ExtendedComplex::of(z));
            if (w.infinite) throw numeric_error("halfplane model: evaluation at the pole");
            return w.value;
        }
        case MapKind::baker_exp: {
            if (-z.real() > 690.0) throw numeric_error("baker: exponential overflow");
            return z + std::exp(-z);
        }
    }
    throw config_error("evaluate: unknown map kind");
}

inline Complex derivative(const MapDescriptor& f, Complex z) {
    switch (f.kind) {
        case MapKind::power:
            return static_cast<double>(f.power_degree) * detail::pow_int(z, f.power_degree - 1);
        case MapKind::polynomial:
            return poly_eval2(f.num, z).second;
        case MapKind::rational:
        case MapKind::newton_of_polynomial: {
            const auto [p, dp] = poly_eval2(f.num, z);
            const auto [q, dq] = poly_eval2(f.den, z);
            if (std::abs(q) == 0.0) throw numeric_error("rational: derivative at a pole");
            return (dp * q - p * dq) / (q * q);
        }
        case MapKind::finite_blaschke:
            return detail::finite_blaschke_eval2(f.blaschke_zeros, f.rotation, z).second;
        case MapKind::infinite_blaschke:
            return detail::infinite_blaschke_derivative(f.zero_rule, z);
        case MapKind::halfplane_moebius_model:
            return moebius_derivative(f.disk_model, z);
        case MapKind::baker_exp: {
            if (-z.real() > 690.0) throw numeric_error("baker: exponential overflow");
            return 1.0 - std::exp(-z);
        }
    }
    throw config_error("derivative: unknown map kind");
}

// ---- catalog constructors ----------------------------------------------

namespace detail {

inline void attach_polynomial_fixed_point_data(MapDescriptor& d, const Poly& p) {
    // Fixed points p(z) = z; tag attracting ones and one repeller as
    // component metadata when present.
    Poly fixed = poly_sub(p, Poly{Complex{0.0, 0.0}, Complex{1.0, 0.0}});
    poly_trim(fixed, 0.0);
    if (poly_degree(fixed) < 1) return;
    for (const Complex r : poly_roots(fixed)) {
        const Complex mult = poly_eval2(p, r).second;
        if (std::abs(mult) < 1.0 - 1e-9) d.attractors.push_back(r);
        else if (std::abs(mult) > 1.0 + 1e-9 && !d.boundary_repeller) d.boundary_repeller = r;
    }
}

} // namespace detail

inline MapDescriptor make_power(int degree) {
    if (degree < 1 || degree > 64) throw config_error("make_power: degree must be in [1, 64]");
    MapDescriptor d;
    d.kind = MapKind::power;
    d.power_degree = degree;
    d.label = "z^" + std::to_string(degree);
    if (degree >= 2) {
        d.attractors = {Complex{0.0, 0.0}};
        d.boundary_repeller = Complex{1.0, 0.0};
    }
    detail::derivative_self_test(d, detail::default_sampler(d));
    return d;
}

inline MapDescriptor make_polynomial(Poly coeffs, std::string label = "") {
    poly_trim(coeffs, 0.0);
    if (poly_degree(coeffs) < 1) throw config_error("make_polynomial: degree must be at least 1");
    MapDescriptor d;
    d.kind = MapKind::polynomial;
    d.num = std::move(coeffs);
    d.label = label.empty() ? "polynomial" : std::move(label);
    detail::attach_polynomial_fixed_point_data(d, d.num);
    detail::derivative_self_test(d, detail::default_sampler(d));
    return d;
}

inline MapDescriptor make_rational(Poly num, Poly den, std::string label = "") {
    poly_trim(num, 0.0);
    poly_trim(den, 0.0);
    if (poly_degree(den) == 0 && std::abs(den[0]) == 0.0)
        throw config_error("make_rational: zero denominator");
    MapDescriptor d;
    d.kind = MapKind::rational;
    d.num = std::move(num);
    d.den = std::move(den);
    d.label = label.empty() ? "rational" : std::move(label);
    detail::derivative_self_test(d, detail::default_sampler(d));
    return d;
}

inline MapDescriptor make_finite_blaschke(std::vector<Complex> zeros, Complex rotation = {1.0, 0.0},
                                          std::string label = "") {
    if (zeros.empty()) throw config_error("make_finite_blaschke: need at least one zero");
    for (const Complex a : zeros)
        if (std::abs(a) >= 1.0 - 1e-12)
            throw config_error("make_finite_blaschke: zeros must lie strictly inside the disk");
    if (std::abs(std::abs(rotation) - 1.0) > 1e-12)
        throw config_error("make_finite_blaschke: rotation must be unimodular");
    MapDescriptor d;
    d.kind = MapKind::finite_blaschke;
    d.blaschke_zeros = std::move(zeros);
    d.rotation = rotation;
    d.label = label.empty() ? "blaschke_" + std::to_string(d.blaschke_zeros.size()) : std::move(label);
    detail::derivative_self_test(d, detail::default_sampler(d));
    return d;
}

inline MapDescriptor make_infinite_blaschke(BlaschkeZeroRule rule, std::string label = "") {
    if (rule.type == BlaschkeZeroRule::Type::geometric) {
        if (!(rule.q > 0.0) || rule.q >= 1.0 || !(rule.c > 0.0) || rule.c * rule.q >= 1.0)
            throw config_error("make_infinite_blaschke: geometric rule needs 0<q<1 and c*q<1");
    } else if (!rule.fn) {
        throw config_error("make_infinite_blaschke: callback rule without a callback");
    }
    MapDescriptor d;
    d.kind = MapKind::infinite_blaschke;
    d.zero_rule = std::move(rule);
    d.declared_singularities = {Complex{1.0, 0.0}};  // zeros accumulate there
    d.label = label.empty() ? "infinite_blaschke" : std::move(label);
    detail::derivative_self_test(d, detail::default_sampler(d));
    return d;
}

// T given by coefficients acting on the upper half-plane; the stored disk
// conjugate is C^{-1} . T . C with C(z) = i(1+z)/(1-z), so the disk model
// carries the Denjoy-Wolff point of T(infinity) at z = 1.
inline MapDescriptor make_halfplane_model(Complex a, Complex b, Complex c, Complex dd,
                                          std::string label = "") {
    MapDescriptor d;
    d.kind = MapKind::halfplane_moebius_model;
    d.halfplane_model = make_moebius(a, b, c, dd);
    const auto C = disk_to_halfplane(Complex{1.0, 0.0});
    d.disk_model = moebius_compose(moebius_inverse(C), moebius_compose(d.halfplane_model, C));
    d.label = label.empty() ? "halfplane_model" : std::move(label);
    // Self-map check: T must keep the upper half-plane inside itself.
    SplitMix64 rng(0xB0A7ull);
    for (int i = 0; i < 64; ++i) {
        const Complex w{rng.uniform(-50.0, 50.0), std::exp(rng.uniform(-6.0, 6.0))};
        const auto img = moebius_apply(d.halfplane_model, ExtendedComplex::of(w));
        if (!img.infinite && img.value.imag() <= 0.0)
            throw config_error("make_halfplane_model: coefficients do not preserve the half-plane");
    }
    detail::derivative_self_test(d, detail::default_sampler(d));
    return d;
}

inline MapDescriptor make_baker(std::string label = "") {
    MapDescriptor d;
    d.kind = MapKind::baker_exp;
    d.essential_at_infinity = true;
    d.declared_asymptotic_values = {ExtendedComplex::infinity()};  // along Re z -> +inf
    d.label = label.empty() ? "z+exp(-z)" : std::move(label);
    detail::derivative_self_test(d, detail::default_sampler(d));
    return d;
}

inline MapDescriptor make_newton(Poly target, std::string label = "") {
    poly_trim(target, 0.0);
    if (poly_degree(target) < 2)
        throw config_error("make_newton: target polynomial degree must be at least 2");
    MapDescriptor d;
    d.kind = MapKind::newton_of_polynomial;
    d.newton_target = target;
    const Poly fp = poly_derivative(target);
    d.num = poly_sub(poly_mul(Poly{Complex{0.0, 0.0}, Complex{1.0, 0.0}}, fp), target);
    d.den = fp;
    d.attractors = poly_roots(target);  // simple roots are superattracting fixed points
    d.label = label.empty() ? "newton" : std::move(label);
    detail::derivative_self_test(d, detail::default_sampler(d));
    return d;
}

// f(g(z)) for kinds with a rational normal form. The result is a plain
// rational descriptor; metadata is not propagated.
inline MapDescriptor compose_rational(const MapDescriptor& f, const MapDescriptor& g) {
    auto as_rational = [](const MapDescriptor& m) -> std::pair<Poly, Poly> {
        switch (m.kind) {
            case MapKind::power: {
                Poly num(static_cast<std::size_t>(m.power_degree) + 1, Complex{0.0, 0.0});
                num.back() = Complex{1.0, 0.0};
                return {num, Poly{Complex{1.0, 0.0}}};
            }
            case MapKind::polynomial:
                return {m.num, Poly{Complex{1.0, 0.0}}};
            case MapKind::rational:
            case MapKind::newton_of_polynomial:
                return {m.num, m.den};
            case MapKind::finite_blaschke: {
                Poly num{m.rotation};
                Poly den{Complex{1.0, 0.0}};
                for (const Complex a : m.blaschke_zeros) {
                    num = poly_mul(num, Poly{-a, Complex{1.0, 0.0}});
                    den = poly_mul(den, Poly{Complex{1.0, 0.0}, -std::conj(a)});
                }
                return {num, den};
            }
            case MapKind::halfplane_moebius_model: {
                const auto& mm = m.disk_model;
                return {Poly{mm.b, mm.a}, Poly{mm.d, mm.c}};
            }
            default:
                throw config_error("compose_rational: map has no rational normal form");
        }
    };
    const auto [pf, qf] = as_rational(f);
    const auto [pg, qg] = as_rational(g);
    const int D = std::max(poly_degree(pf), poly_degree(qf));
    Poly num = poly_homogeneous(pf, pg, qg, D);
    Poly den = poly_homogeneous(qf, pg, qg, D);
    return make_rational(std::move(num), std::move(den), f.label + "." + g.label);
}

// ---- orbits ---------------------------------------------------------------

struct OrbitOptions {
    int max_steps = 10000;
    double escape_radius = 1e6;
    double convergence_tol = 1e-12;
    double cycle_grid = 1e-10;  // quantisation cell for cycle detection
};

enum class OrbitStatus { converged, cycle, escaped, singular_hit, budget_exhausted };

inline const char* orbit_status_name(OrbitStatus s) {
    switch (s) {
        case OrbitStatus::converged: return "converged";
        case OrbitStatus::cycle: return "cycle";
        case OrbitStatus::escaped: return "escaped";
        case OrbitStatus::singular_hit: return "singular_hit";
        case OrbitStatus::budget_exhausted: return "budget_exhausted";
    }
    return "?";
}

struct OrbitResult {
    std::vector<Complex> points;  // z0 first
    OrbitStatus status = OrbitStatus::budget_exhausted;
    Complex terminal{0.0, 0.0};  // limit, cycle representative, or last point
    int cycle_length = 0;
    int steps = 0;
};

namespace detail {

inline bool same_cell(Complex a, Complex b, double grid) {
    return std::llround(a.real() / grid) == std::llround(b.real() / grid) &&
           std::llround(a.imag() / grid) == std::llround(b.imag() / grid);
}

} // namespace detail

// Forward orbit with Floyd (tortoise/hare) cycle detection on points
// quantised to the cycle grid.
inline OrbitResult orbit(const MapDescriptor& f, Complex z0, OrbitOptions opt = {}) {
    OrbitResult out;
    out.points.push_back(z0);
    Complex slow = z0, fast = z0;
    auto step = [&](Complex z) { return evaluate(f, z); };
    for (int n = 1; n <= opt.max_steps; ++n) {
        Complex next;
        try {
            next = step(out.points.back());
        } catch (const numeric_error&) {
            out.status = OrbitStatus::singular_hit;
            out.terminal = out.points.back();
            out.steps = n - 1;
            return out;
        }
        out.points.push_back(next);
        out.steps = n;
        if (!finite_number(next) || std::abs(next) > opt.escape_radius) {
            out.status = OrbitStatus::escaped;
            out.terminal = next;
            return out;
        }
        const Complex prev = out.points[out.points.size() - 2];
        if (std::abs(next - prev) < opt.convergence_tol) {
            out.status = OrbitStatus::converged;
            out.terminal = next;
            return out;
        }
        // Floyd: advance the tortoise one step and the hare two per loop.
        try {
            slow = step(slow);
            fast = step(step(fast));
        } catch (const numeric_error&) {
            continue;  // the pointer orbits fell off; main orbit continues
        }
        if (!finite_number(fast) || std::abs(fast) > opt.escape_radius) continue;
        if (n > 1 && detail::same_cell(slow, fast, opt.cycle_grid)) {
            // Measure the cycle length by walking until the cell repeats.
            Complex walker = slow;
            int len = 0;
            bool closed = false;
            try {
                do {
                    walker = step(walker);
                    ++len;
                    closed = detail::same_cell(walker, slow, opt.cycle_grid);
                } while (!closed && len <= opt.max_steps);
            } catch (const numeric_error&) {
                closed = false;
            }
            if (closed) {
                // A 1-cycle on the grid is a fixed point: convergence.
                out.status = (len == 1) ? OrbitStatus::converged : OrbitStatus::cycle;
                out.terminal = slow;
                out.cycle_length = len;
                return out;
            }
        }
    }
    out.status = OrbitStatus::budget_exhausted;
    out.terminal = out.points.back();
    return out;
}

// ---- singular values ------------------------------------------------------

struct SingularValueReport {
    std::vector<ClusteredRoot> critical_points;
    bool critical_point_at_infinity = false;
    std::vector<Complex> critical_values;
    bool critical_value_at_infinity = false;
    std::vector<ExtendedComplex> asymptotic_values;
    std::vector<Complex> plane_singularities;
    bool essential_at_infinity = false;
    bool truncated = false;  // derived from a finite truncation of an infinite product
    std::string note;
};

inline constexpr double kWorkingRegionRadius = 4.0;

// Derivative-zero locus inside the working region. For entries whose
// derivative has a polynomial numerator this is a root solve; baker_exp
// enumerates its lattice of critical points directly.
inline std::vector<ClusteredRoot> critical_points(const MapDescriptor& f,
                                                  double region_radius = kWorkingRegionRadius) {
    auto solve_and_filter = [&](const Poly& numerator) {
        std::vector<Complex> roots = poly_roots(numerator);
        std::vector<Complex> kept;
        for (const Complex r : roots)
            if (std::abs(r) <= region_radius) kept.push_back(r);
        return cluster_roots(kept, 1e-8);
    };
    switch (f.kind) {
        case MapKind::power: {
            std::vector<ClusteredRoot> out;
            if (f.power_degree >= 2) out.push_back({Complex{0.0, 0.0}, f.power_degree - 1});
            return out;
        }
        case MapKind::polynomial:
            return solve_and_filter(poly_derivative(f.num));
        case MapKind::rational:
        case MapKind::newton_of_polynomial: {
            const Poly numerator =
                poly_sub(poly_mul(poly_derivative(f.num), f.den), poly_mul(f.num, poly_derivative(f.den)));
            return solve_and_filter(numerator);
        }
        case MapKind::finite_blaschke: {
            Poly num{f.rotation};
            Poly den{Complex{1.0, 0.0}};
            for (const Complex a : f.blaschke_zeros) {
                num = poly_mul(num, Poly{-a, Complex{1.0, 0.0}});
                den = poly_mul(den, Poly{Complex{1.0, 0.0}, -std::conj(a)});
            }
            const Poly numerator =
                poly_sub(poly_mul(poly_derivative(num), den), poly_mul(num, poly_derivative(den)));
            return solve_and_filter(numerator);
        }
        case MapKind::halfplane_moebius_model:
            return {};
        case MapKind::baker_exp: {
            // 1 - exp(-z) = 0 at z = 2 pi i k.
            std::vector<ClusteredRoot> out;
            const double tau = 6.283185307179586476925286766559;
            const int kmax = static_cast<int>(region_radius / tau);
            for (int k = -kmax; k <= kmax; ++k)
                out.push_back({Complex{0.0, tau * k}, 1});
            return out;
        }
        case MapKind::infinite_blaschke:
            throw config_error("critical_points: infinite product has no polynomial derivative numerator");
    }
    return {};
}

inline SingularValueReport singular_values(const MapDescriptor& f,
                                           double region_radius = kWorkingRegionRadius) {
    SingularValueReport r;
    r.asymptotic_values = f.declared_asymptotic_values;
    r.plane_singularities = f.declared_singularities;
    r.essential_at_infinity = f.essential_at_infinity;
    if (f.kind == MapKind::infinite_blaschke) {
        // Use a finite truncation of the product for the critical structure
        // away from the accumulation point; flagged as such.
        MapDescriptor trunc;
        trunc.kind = MapKind::finite_blaschke;
        for (int k = 1; k <= 16; ++k)
            trunc.blaschke_zeros.push_back(Complex{f.zero_rule.zero(k), 0.0});
        trunc.rotation = Complex{1.0, 0.0};
        r.critical_points = critical_points(trunc, region_radius);
        r.truncated = true;
        r.note = "critical data from a depth-16 truncation of the infinite product";
        for (const auto& cp : r.critical_points)
            r.critical_values.push_back(evaluate(trunc, cp.value));
        return r;
    }
    r.critical_points = critical_points(f, region_radius);
    for (const auto& cp : r.critical_points) {
        try {
            r.critical_values.push_back(evaluate(f, cp.value));
        } catch (const numeric_error&) {
            r.critical_value_at_infinity = true;
        }
    }
    const bool polynomial_like =
        f.kind == MapKind::power || f.kind == MapKind::polynomial;
    if (polynomial_like && (f.kind == MapKind::power ? f.power_degree : poly_degree(f.num)) >= 2) {
        // Infinity is a fixed critical point of every polynomial of degree >= 2.
        r.critical_point_at_infinity = true;
        r.critical_value_at_infinity = true;
    }
    return r;
}

struct PostsingularCloud {
    std::vector<Complex> points;
    bool reached_infinity = false;
    int depth = 0;
};

// Forward orbits of the singular values up to the requested depth.
inline PostsingularCloud postsingular_approx(const MapDescriptor& f, int depth,
                                             double escape_radius = 1e12) {
    if (depth < 0) throw config_error("postsingular_approx: depth must be non-negative");
    PostsingularCloud cloud;
    cloud.depth = depth;
    const SingularValueReport sv = singular_values(f);
    std::vector<Complex> wave = sv.critical_values;
    for (const auto& av : sv.asymptotic_values) {
        if (av.infinite) cloud.reached_infinity = true;
        else wave.push_back(av.value);
    }
    if (sv.critical_value_at_infinity) cloud.reached_infinity = true;
    for (const Complex s : wave) cloud.points.push_back(s);
    for (int n = 0; n < depth; ++n) {
        std::vector<Complex> next;
        for (const Complex z : wave) {
            try {
                const Complex w = evaluate(f, z);
                if (!finite_number(w) || std::abs(w) > escape_radius) {
                    cloud.reached_infinity = true;
                    continue;
                }
                next.push_back(w);
                cloud.points.push_back(w);
            } catch (const numeric_error&) {
                cloud.reached_infinity = true;
            }
        }
        wave = std::move(next);
        if (wave.empty()) break;
    }
    return cloud;
}

struct BlaschkeConditionReport {
    bool converges = false;
    double sum = 0.0;         // sum of (1 - a_k), exact for the geometric family
    double tail_bound = 0.0;  // bound on the neglected tail (0 when exact)
};

// Convergence of sum (1 - a_k). The geometric family is summed in closed
// form; callback rules are probed at dyadic checkpoints, where a
// non-shrinking block sum signals divergence.
inline BlaschkeConditionReport blaschke_condition_check(const BlaschkeZeroRule& rule) {
    BlaschkeConditionReport r;
    if (rule.type == BlaschkeZeroRule::Type::geometric) {
        r.converges = rule.q < 1.0;
        r.sum = rule.c * rule.q / (1.0 - rule.q);
        return r;
    }
    if (!rule.fn) throw config_error("blaschke_condition_check: callback rule without a callback");
    double sum = 0.0;
    int k = 1;
    double prev_block = -1.0;
    int shrinking = 0;
    for (int block = 4; block <= 22; ++block) {
        const int upto = 1 << block;
        double block_sum = 0.0;
        for (; k <= upto; ++k) {
            const double a = rule.fn(k);
            if (!(a > 0.0) || a >= 1.0)
                throw config_error("blaschke_condition_check: rule left (0, 1)");
            block_sum += 1.0 - a;
        }
        sum += block_sum;
        if (block_sum < 1e-12) {
            r.converges = true;
            r.sum = sum;
            r.tail_bound = block_sum;
            return r;
        }
        if (prev_block >= 0.0) {
            const double ratio = block_sum / prev_block;
            if (ratio > 0.85 && block_sum > 1e-4) {
                // Dyadic blocks not shrinking: a divergent condensation.
                r.converges = false;
                r.sum = sum;
                return r;
            }
            shrinking = (ratio <= 0.75) ? shrinking + 1 : 0;
            if (shrinking >= 3) {
                // Blocks decay geometrically; extrapolate the tail.
                r.converges = true;
                r.tail_bound = block_sum * ratio / (1.0 - ratio);
                r.sum = sum + r.tail_bound;
                return r;
            }
        }
        prev_block = block_sum;
    }
    throw numeric_error("blaschke_condition_check: undetermined after 2^22 terms");
}

} // namespace innerdyn
