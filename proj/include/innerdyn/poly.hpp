#pragma once
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "innerdyn/error.hpp"
#include "innerdyn/sphere.hpp"

namespace innerdyn {

// Dense polynomial, coefficients ascending: p[0] + p[1] z + p[2] z^2 + ...
using Poly = std::vector<Complex>;

inline void poly_trim(Poly& p, double tol = 0.0) {
    while (p.size() > 1 && std::abs(p.back()) <= tol) p.pop_back();
}

inline int poly_degree(const Poly& p) {
    int d = static_cast<int>(p.size()) - 1;
    while (d > 0 && std::abs(p[static_cast<std::size_t>(d)]) == 0.0) --d;
    return d;
}

inline Complex poly_eval(const Poly& p, Complex z) {
    Complex acc{0.0, 0.0};
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * z + p[i];
    return acc;
}

// Value and derivative in one Horner pass.
inline std::pair<Complex, Complex> poly_eval2(const Poly& p, Complex z) {
    Complex v{0.0, 0.0}, d{0.0, 0.0};
    for (std::size_t i = p.size(); i-- > 0;) {
        d = d * z + v;
        v = v * z + p[i];
    }
    return {v, d};
}

inline Poly poly_derivative(const Poly& p) {
    if (p.size() <= 1) return Poly{Complex{0.0, 0.0}};
    Poly d(p.size() - 1);
    for (std::size_t i = 1; i < p.size(); ++i) d[i - 1] = static_cast<double>(i) * p[i];
    return d;
}

inline Poly poly_add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), Complex{0.0, 0.0});
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return r;
}

inline Poly poly_sub(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()), Complex{0.0, 0.0});
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    return r;
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly r(a.size() + b.size() - 1, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

inline Poly poly_scale(const Poly& a, Complex s) {
    Poly r = a;
    for (auto& c : r) c *= s;
    return r;
}

// p(q(z)) by Horner over polynomial arithmetic.
inline Poly poly_compose(const Poly& p, const Poly& q) {
    Poly acc{Complex{0.0, 0.0}};
    for (std::size_t i = p.size(); i-- > 0;) {
        acc = poly_mul(acc, q);
        if (acc.empty()) acc = Poly{Complex{0.0, 0.0}};
        acc[0] += p[i];
    }
    return acc;
}

// Homogenised composition helper: given p of degree <= D, returns
// sum_k p[k] * num^k * den^(D-k). Used to compose rational maps without
// ever forming the (generally non-polynomial) intermediate quotient.
inline Poly poly_homogeneous(const Poly& p, const Poly& num, const Poly& den, int D) {
    Poly result{Complex{0.0, 0.0}};
    Poly den_pow{Complex{1.0, 0.0}};
    std::vector<Poly> den_powers(static_cast<std::size_t>(D) + 1);
    for (int k = 0; k <= D; ++k) {
        den_powers[static_cast<std::size_t>(k)] = den_pow;
        if (k < D) den_pow = poly_mul(den_pow, den);
    }
    Poly num_pow{Complex{1.0, 0.0}};
    for (int k = 0; k <= D; ++k) {
        if (k < static_cast<int>(p.size()) && std::abs(p[static_cast<std::size_t>(k)]) != 0.0) {
            Poly term = poly_mul(num_pow, den_powers[static_cast<std::size_t>(D - k)]);
            result = poly_add(result, poly_scale(term, p[static_cast<std::size_t>(k)]));
        }
        if (k < D) num_pow = poly_mul(num_pow, num);
    }
    return result;
}

struct RootSolveOptions {
    int max_sweeps = 240;
    double tol = 1e-13;
    int polish_steps = 4;
    // Initial ring radius for the implicit interface; the dense interface
    // derives one from the coefficients when this is zero.
    double ring_radius = 0.0;
};

namespace detail {

// Aberth-Ehrlich simultaneous iteration. `eval` returns (p(z), p'(z));
// the polynomial itself never needs to exist as a coefficient array, which
// keeps high iterates of quadratic maps evaluable without overflow.
template <typename Eval>
std::vector<Complex> aberth_solve(int degree, Eval&& eval, const RootSolveOptions& opt) {
    if (degree < 1) return {};
    const double radius = opt.ring_radius > 0.0 ? opt.ring_radius : 1.0;
    std::vector<Complex> z(static_cast<std::size_t>(degree));
    // Irrational angular offset and a mild radial stagger break any symmetry
    // the root set might share with a plain ring start.
    const double golden = 0.61803398874989484820458683436564;
    for (int j = 0; j < degree; ++j) {
        const double frac = std::fmod(golden * (j + 1), 1.0);
        const double theta = 6.283185307179586 * (static_cast<double>(j) + 0.2511) /
                             static_cast<double>(degree);
        const double r = radius * (0.55 + 0.9 * frac);
        z[static_cast<std::size_t>(j)] = Complex{r * std::cos(theta), r * std::sin(theta)};
    }
    std::vector<bool> done(static_cast<std::size_t>(degree), false);
    for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
        int active = 0;
        double worst = 0.0;
        for (int j = 0; j < degree; ++j) {
            if (done[static_cast<std::size_t>(j)]) continue;
            ++active;
            const Complex zj = z[static_cast<std::size_t>(j)];
            auto [v, dv] = eval(zj);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) ||
                !std::isfinite(dv.real()) || !std::isfinite(dv.imag())) {
                // started outside the evaluable region (high iterates blow up
                // fast); pull the point inward and keep sweeping
                z[static_cast<std::size_t>(j)] = zj * 0.6;
                worst = std::max(worst, 1.0);
                continue;
            }
            if (std::abs(v) == 0.0) {
                done[static_cast<std::size_t>(j)] = true;
                continue;
            }
            Complex w = (std::abs(dv) == 0.0) ? Complex{0.0, 0.0} : v / dv;
            Complex s{0.0, 0.0};
            for (int k = 0; k < degree; ++k) {
                if (k == j) continue;
                Complex diff = zj - z[static_cast<std::size_t>(k)];
                if (std::abs(diff) < 1e-300) diff = Complex{1e-300, 0.0};
                s += 1.0 / diff;
            }
            Complex step;
            if (std::abs(dv) == 0.0) {
                // Sitting on a critical point of p: nudge off it.
                step = Complex{opt.tol * 100.0 + 1e-9, 1e-9};
            } else {
                const Complex denom = 1.0 - w * s;
                step = (std::abs(denom) < 1e-300) ? w : w / denom;
            }
            // Trust region: huge steps only ever come from degenerate
            // configurations, damp them instead of flying off.
            const double cap = 0.5 * (1.0 + std::abs(zj));
            const double mag = std::abs(step);
            if (mag > cap) step *= cap / mag;
            z[static_cast<std::size_t>(j)] = zj - step;
            const double rel = std::abs(step) / (1.0 + std::abs(zj));
            worst = std::max(worst, rel);
            if (rel < opt.tol) done[static_cast<std::size_t>(j)] = true;
        }
        if (active == 0 || worst < opt.tol) break;
    }
    // Individual Newton polish; quadratic cleanup of whatever Aberth left.
    for (int j = 0; j < degree; ++j) {
        Complex& zj = z[static_cast<std::size_t>(j)];
        for (int it = 0; it < opt.polish_steps; ++it) {
            auto [v, dv] = eval(zj);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) ||
                !std::isfinite(dv.real()) || !std::isfinite(dv.imag())) break;
            if (std::abs(dv) == 0.0) break;
            const Complex step = v / dv;
            if (std::abs(step) > 0.5 * (1.0 + std::abs(zj))) break;
            zj -= step;
            if (std::abs(step) < 1e-15 * (1.0 + std::abs(zj))) break;
        }
    }
    return z;
}

} // namespace detail

// Roots of an implicitly evaluated polynomial of known degree.
inline std::vector<Complex> poly_roots_implicit(
    int degree, const std::function<std::pair<Complex, Complex>(Complex)>& eval,
    RootSolveOptions opt = {}) {
    return detail::aberth_solve(degree, eval, opt);
}

// All complex roots of a dense polynomial. Exact zero roots are deflated
// first so monomial-heavy inputs (derivatives of powers) stay fast.
inline std::vector<Complex> poly_roots(Poly p, RootSolveOptions opt = {}) {
    poly_trim(p);
    int d = poly_degree(p);
    if (d == 0) return {};
    std::vector<Complex> roots;
    std::size_t shift = 0;
    while (shift < p.size() - 1 && std::abs(p[shift]) == 0.0) {
        roots.push_back(Complex{0.0, 0.0});
        ++shift;
    }
    if (shift > 0) p.erase(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(shift));
    d = poly_degree(p);
    if (d == 0) return roots;
    if (d == 1) {
        roots.push_back(-p[0] / p[1]);
        return roots;
    }
    if (opt.ring_radius <= 0.0) {
        // Fujiwara bound on root moduli.
        const double lead = std::abs(p[static_cast<std::size_t>(d)]);
        double bound = 0.0;
        for (int k = 0; k < d; ++k) {
            double term = std::abs(p[static_cast<std::size_t>(k)]) / lead;
            if (k == 0) term *= 0.5;
            bound = std::max(bound, std::pow(term, 1.0 / static_cast<double>(d - k)));
        }
        opt.ring_radius = std::max(2.0 * bound, 1e-6);
    }
    const Poly dp = poly_derivative(p);
    auto eval = [&](Complex z) { return std::make_pair(poly_eval(p, z), poly_eval(dp, z)); };
    auto rest = detail::aberth_solve(d, eval, opt);
    roots.insert(roots.end(), rest.begin(), rest.end());
    return roots;
}

struct ClusteredRoot {
    Complex value;
    int multiplicity = 1;
};

// Greedy clustering of a raw root list; multiple roots come back from the
// solver as tight clumps, callers usually want them merged.
inline std::vector<ClusteredRoot> cluster_roots(const std::vector<Complex>& roots,
                                                double tol = 1e-6) {
    std::vector<ClusteredRoot> out;
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        Complex sum = roots[i];
        int count = 1;
        used[i] = true;
        for (std::size_t j = i + 1; j < roots.size(); ++j) {
            if (!used[j] && std::abs(roots[j] - roots[i]) < tol) {
                sum += roots[j];
                ++count;
                used[j] = true;
            }
        }
        out.push_back({sum / static_cast<double>(count), count});
    }
    return out;
}

} // namespace innerdyn
