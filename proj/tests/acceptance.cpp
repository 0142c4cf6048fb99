// End-to-end acceptance battery. Prints one PASS/FAIL line per criterion
// and exits nonzero if any of them fail. Every tolerance and budget is
// pinned here in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "innerdyn/innerdyn.hpp"

using namespace innerdyn;

namespace {

int g_failures = 0;

struct Checker {
    std::string notes;
    bool ok = true;
    void require(bool cond, const char* what) {
        if (cond) return;
        ok = false;
        if (!notes.empty()) notes += "; ";
        notes += what;
    }
};

template <typename Fn>
void criterion(int idx, const char* name, double budget_s, Fn&& body) {
    Checker c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.notes = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0.0 && secs >= budget_s) {
        c.ok = false;
        if (!c.notes.empty()) c.notes += "; ";
        c.notes += "over time budget";
    }
    std::printf("%s  criterion %d  %-46s (%6.2f s)%s%s\n", c.ok ? "PASS" : "FAIL", idx, name,
                secs, c.notes.empty() ? "" : "  -- ", c.notes.c_str());
    if (!c.ok) ++g_failures;
}

// ---------- criterion 1: distortion constant and coefficient bounds ----------

void coefficient_bounds(Checker& c) {
    c.require(std::abs(distortion_constant(0.5) - 3.0) <= 1e-12, "C(0.5) != 3");

    auto bounded_by_n = [&](auto&& f, const char* label) {
        for (int n = 1; n <= 20; ++n) {
            const Complex a = coefficient_estimate(f, n);
            if (std::abs(a) > n + 1e-6) {
                c.require(false, label);
                return;
            }
        }
    };
    bounded_by_n([](Complex z) { return z; }, "identity coefficients exceed n");
    bounded_by_n([](Complex z) { return z / ((1.0 - z) * (1.0 - z)); },
                 "koebe coefficients exceed n");

    // Random univalent polynomials: phi = z + sum c_k z^k with
    // sum k |c_k| = 0.9 keeps Re phi' >= 0.1 on the disk, which forces
    // univalence (Noshiro-Warschawski).
    SplitMix64 rng(2024);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Complex> coeff(10, Complex{0.0, 0.0});
        double weight = 0.0;
        double raw[3];
        int deg[3];
        for (int i = 0; i < 3; ++i) {
            deg[i] = 2 + static_cast<int>(rng.next() % 8);
            raw[i] = 0.1 + rng.uniform();
            weight += raw[i] * deg[i];
        }
        for (int i = 0; i < 3; ++i) {
            const double mag = 0.9 * raw[i] / weight;
            coeff[static_cast<std::size_t>(deg[i])] +=
                std::polar(mag, 6.283185307179586 * rng.uniform());
        }
        auto phi = [&coeff](Complex z) {
            Complex acc = z;
            Complex zn = z;
            for (std::size_t k = 2; k < coeff.size(); ++k) {
                zn *= z;
                acc += coeff[k] * zn;
            }
            return acc;
        };
        bounded_by_n(phi, "random univalent sample coefficients exceed n");
    }
}

// ---------- criterion 2: Cowen classification of the canonical maps ----------

void canonical_classification(Checker& c) {
    struct Case {
        MapDescriptor map;
        CowenClass expect;
    };
    const Case cases[] = {
        {make_power(2), CowenClass::elliptic},
        {make_halfplane_model({2.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}, "2w"),
         CowenClass::hyperbolic},
        {make_halfplane_model({1.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}, "w+1"),
         CowenClass::simply_parabolic},
        {make_halfplane_model({1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}, {1.0, 0.0}, "w+i"),
         CowenClass::doubly_parabolic},
    };
    for (const auto& k : cases) {
        const auto t0 = std::chrono::steady_clock::now();
        const auto cls = cowen_classify(k.map);
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (cls.type != k.expect) {
            c.require(false, k.map.label.c_str());
        }
        c.require(secs < 1.0, "single classification over one second");
    }

    const auto hyp = make_rational({Complex{1.0, 0.0}, Complex{3.0, 0.0}},
                                   {Complex{3.0, 0.0}, Complex{1.0, 0.0}}, "(3z+1)/(z+3)");
    const auto dw = denjoy_wolff(hyp);
    c.require(dw.on_boundary, "(3z+1)/(z+3) DW point not on the boundary");
    c.require(std::abs(dw.point - Complex{1.0, 0.0}) <= 1e-8, "(3z+1)/(z+3) DW point off 1");
    c.require(std::abs(dw.multiplier - Complex{0.5, 0.0}) <= 1e-8,
              "(3z+1)/(z+3) multiplier off 0.5");
}

// ---------- criterion 3: the 1/n recurrence envelope ----------

void recurrence_envelope(Checker& c) {
    const auto vertical =
        make_halfplane_model({1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}, {1.0, 0.0}, "w+i");
    const auto horizontal =
        make_halfplane_model({1.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}, "w+1");

    const auto good = recurrence_criterion_check(vertical, 1.0, 100, 10000, 1e-3);
    c.require(good.satisfied, "w+i misses the 1/n envelope");
    c.require(good.max_residual < 1e-3, "w+i fit residual too large");

    // the steps themselves stay under 2/n across the whole fit range
    const auto steps = hyperbolic_step_sequence(vertical, 10000);
    c.require(steps.size() >= 10000, "w+i orbit ended early");
    for (std::size_t n = 100; n < steps.size() && n <= 10000; ++n) {
        if (steps[n - 1] > 2.0 / static_cast<double>(n)) {
            c.require(false, "w+i step exceeds 2/n");
            break;
        }
    }

    const auto bad = recurrence_criterion_check(horizontal, 1.0, 100, 10000, 1e-3);
    c.require(!bad.satisfied, "w+1 wrongly satisfies the envelope");
}

// ---------- criterion 4: boundary ergodicity statistics ----------

std::string ergodicity_payload(const ErgodicityReport& rep) {
    ordered_json j;
    j["iterations"] = rep.iterations;
    j["ks_statistic"] = rep.ks_statistic;
    j["ks_threshold"] = rep.ks_threshold;
    j["chi2"] = rep.chi2;
    j["chi2_threshold"] = rep.chi2_threshold;
    j["bins"] = rep.bins;
    j["max_gap"] = rep.max_gap;
    j["arc_returns"] = rep.arc_returns;
    return j.dump(2);
}

std::string run_ergodicity(Checker* c) {
    ErgodicityOptions opt;
    opt.iterations = 1000000;
    opt.bins = 64;
    const auto rep = ergodicity_experiment(make_power(2), 1.0, opt);
    if (c != nullptr) {
        c->require(rep.ks_statistic < 0.01, "discrepancy at least 0.01");
        c->require(rep.ks_pass, "KS above the 1% critical value");
        c->require(rep.chi2_pass, "chi^2 above the 99% critical value");
        c->require(rep.bins == 64, "wrong bin count");
    }
    return ergodicity_payload(rep);
}

// ---------- criterion 5: crosscut singularity detection ----------

void singularity_detection(Checker& c) {
    BlaschkeZeroRule rule;  // zeros at 1 - 2^-k
    const auto B = make_infinite_blaschke(rule);
    SingularityProbeOptions opt;
    opt.diameter = 0.05;
    opt.samples = 100000;
    opt.seed = 5;
    const auto at_one = singularity_probe(B, Complex{1.0, 0.0}, opt);
    c.require(at_one.singular, "zero accumulation point not flagged");
    c.require(at_one.samples == 100000, "probe sample count off");
    const auto at_minus_one = singularity_probe(B, Complex{-1.0, 0.0}, opt);
    c.require(!at_minus_one.singular, "regular point wrongly flagged");
}

// ---------- criterion 6: inverse branch control ----------

void inverse_branch_control(Checker& c) {
    const auto sq = make_power(2);
    const Complex one{1.0, 0.0};
    const auto est = well_definedness_radius(sq, one, 10);
    c.require(std::abs(est.rho0 - 1.0) <= 1e-9, "rho0 at 1 is not 1");
    c.require(!est.degenerate, "rho0 degenerate");
    for (int n = 1; n <= 10; ++n) {
        const auto rep = stolz_containment_check(sq, one, Complex{0.0, 0.0}, 0.05, 0.5, n);
        if (!rep.contained || rep.max_angle > 1e-12 || rep.obstructions != 0) {
            c.require(false, "squaring containment not radial at some depth");
            break;
        }
    }

    const auto B = make_finite_blaschke({Complex{0.0, 0.0}, Complex{0.5, 0.0}});
    const double alpha = 0.7853981633974483;  // pi/4
    const auto rad = find_containment_radius(B, one, Complex{0.0, 0.0}, alpha, 10);
    c.require(rad.found, "no containment radius found for the Blaschke map");
    c.require(rad.rho1 > 0.0, "bisected radius not positive");
    for (int n = 1; n <= 10; ++n) {
        const auto rep = stolz_containment_check(B, one, Complex{0.0, 0.0}, alpha, rad.rho1, n);
        if (!rep.contained || rep.obstructions != 0) {
            c.require(false, "Blaschke containment fails at the bisected radius");
            break;
        }
    }
}

// ---------- criterion 7: harmonic measure estimates ----------

std::string run_harmonic(Checker* c) {
    WalkParams wp;
    wp.walks = 100000;
    wp.rng_seed = 71;

    const auto from_center = harmonic_sample(make_disk_oracle(Complex{0.0, 0.0}), wp);
    if (c != nullptr) {
        const double eighth = 0.7853981633974483;
        for (int k = 0; k < 8; ++k) {
            const double frac = arc_hit_fraction(from_center, k * eighth, (k + 1) * eighth);
            if (std::abs(frac - 0.125) > 0.01) {
                c->require(false, "center arc fraction off by more than 0.01");
                break;
            }
        }
    }

    wp.rng_seed = 72;
    const auto off_center = harmonic_sample(make_disk_oracle(Complex{0.5, 0.0}), wp);
    if (c != nullptr) {
        const double half_pi = 1.5707963267948966;
        const double got = arc_hit_fraction(off_center, -half_pi, half_pi);
        const double want = poisson_arc_measure(Complex{0.5, 0.0}, -half_pi, half_pi);
        c->require(std::abs(got - want) <= 0.02, "off-center arc misses the Poisson value");
    }

    wp.rng_seed = 73;
    const auto halfplane = harmonic_sample(make_halfplane_oracle(Complex{0.0, 1.0}), wp);
    if (c != nullptr) {
        long in_interval = 0;
        for (const Complex h : halfplane.hits)
            if (h.real() >= -1.0 && h.real() <= 1.0) ++in_interval;
        const double frac =
            static_cast<double>(in_interval) / static_cast<double>(halfplane.hits.size());
        c->require(std::abs(frac - 0.5) <= 0.02, "half-plane interval fraction off 0.5");
        c->require(halfplane.timeouts == 0, "half-plane walks timed out");
    }

    return samples_csv(from_center) + samples_csv(off_center) + samples_csv(halfplane);
}

// ---------- criterion 8: periodic point density sweeps ----------

std::string run_density(Checker* c) {
    const auto sq = make_power(2);
    DensityParams dp;
    dp.seeds = 64;
    dp.delta = 0.1;
    dp.max_period = 12;
    dp.radius = 0.1;
    dp.plan = SeedPlan::uniform_circle;
    const auto rep = density_experiment(sq, dp);
    if (c != nullptr) {
        c->require(rep.success_fraction == 1.0, "squaring sweep missed a seed");
        c->require(rep.certificates.size() == 64, "squaring sweep certificate count off");
        for (const auto& cert : rep.certificates) {
            const double order = std::pow(2.0, cert.period) - 1.0;
            if (std::abs(std::pow(cert.point, order) - 1.0) > 1e-9) {
                c->require(false, "certified point is not the expected root of unity");
                break;
            }
            const double want = std::pow(2.0, cert.period);
            if (std::abs(std::abs(cert.multiplier) - want) > 1e-9 * want) {
                c->require(false, "certified multiplier modulus is not 2^N");
                break;
            }
        }
    }

    const auto f = make_polynomial({Complex{0.2, 0.0}, Complex{0.0, 0.0}, Complex{1.0, 0.0}},
                                   "z^2+0.2");
    const Complex attractor{(1.0 - std::sqrt(0.2)) / 2.0, 0.0};
    DensityParams pp;
    pp.seeds = 32;
    pp.delta = 0.1;
    pp.max_period = 10;
    pp.radius = 0.1;
    pp.plan = SeedPlan::straddle_walk;
    pp.rng_seed = 17;
    pp.attractor = attractor;
    pp.walk_base = attractor;
    const auto prep = density_experiment(f, pp);
    if (c != nullptr) {
        c->require(!prep.certificates.empty(), "perturbed sweep produced no certificates");
        std::map<int, std::vector<OraclePoint>> oracle;
        bool all_ok = true;
        for (const auto& cert : prep.certificates) {
            all_ok = all_ok && cert.residual < 1e-9 && std::abs(cert.multiplier) > 1.0 &&
                     cert.contraction_ratio < 1.0;
            auto& roots = oracle[cert.period];
            if (roots.empty()) roots = oracle_periodic_points(f, cert.period);
            double nearest = 1e300;
            for (const auto& r : roots) nearest = std::min(nearest, std::abs(r.point - cert.point));
            all_ok = all_ok && nearest <= 1e-8;
        }
        c->require(all_ok, "a perturbed certificate failed validation or the oracle");
    }

    return density_report_json(rep, fnv1a_hash("acceptance-squaring")).dump(2) +
           certificates_csv(rep) +
           density_report_json(prep, fnv1a_hash("acceptance-perturbed")).dump(2) +
           certificates_csv(prep);
}

std::string g_c4_payload, g_c7_payload, g_c8_payload;

} // namespace

int main() {
    criterion(1, "distortion constant and coefficient bounds", 1.0, coefficient_bounds);
    criterion(2, "Cowen classification of the canonical maps", 5.0, canonical_classification);
    criterion(3, "1/n step envelope for the parabolic models", 5.0, recurrence_envelope);
    criterion(4, "boundary orbit equidistribution statistics", 5.0,
              [](Checker& c) { g_c4_payload = run_ergodicity(&c); });
    criterion(5, "crosscut density flags the singular point", 10.0, singularity_detection);
    criterion(6, "inverse branch radii and Stolz containment", 30.0, inverse_branch_control);
    criterion(7, "harmonic measure against exact kernels", 30.0,
              [](Checker& c) { g_c7_payload = run_harmonic(&c); });
    criterion(8, "certified periodic points near every seed", 60.0,
              [](Checker& c) { g_c8_payload = run_density(&c); });
    criterion(9, "reruns reproduce reports byte for byte", 0.0, [](Checker& c) {
        c.require(!g_c4_payload.empty() && run_ergodicity(nullptr) == g_c4_payload,
                  "ergodicity report changed between runs");
        c.require(!g_c7_payload.empty() && run_harmonic(nullptr) == g_c7_payload,
                  "harmonic sample tables changed between runs");
        c.require(!g_c8_payload.empty() && run_density(nullptr) == g_c8_payload,
                  "density reports changed between runs");
    });

    if (g_failures != 0) std::printf("%d criterion(s) failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
