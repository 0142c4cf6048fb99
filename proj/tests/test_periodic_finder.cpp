#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <map>
#include <vector>

#include "innerdyn/boundary_measure.hpp"
#include "innerdyn/maps.hpp"
#include "innerdyn/periodic_finder.hpp"

using namespace innerdyn;

namespace {

const double kPi = 3.14159265358979323846;

MapDescriptor squaring() { return make_power(2); }

MapDescriptor perturbed_squaring() {
    // z^2 + 0.2: attracting fixed point (1 - sqrt(0.2))/2, Julia quasicircle
    return make_polynomial(Poly{Complex(0.2, 0.0), Complex(0.0, 0.0), Complex(1.0, 0.0)});
}

double min_oracle_distance(const std::vector<OraclePoint>& oracle, Complex p) {
    double best = std::numeric_limits<double>::max();
    for (const OraclePoint& o : oracle) best = std::min(best, std::abs(o.point - p));
    return best;
}

} // namespace

TEST_CASE("periodic point oracle on closed-form cases") {
    const MapDescriptor sq = squaring();

    SECTION("fixed points of the squaring map") {
        const auto pts = oracle_periodic_points(sq, 1);
        REQUIRE(pts.size() == 2);
        CHECK(std::abs(pts[0].point - Complex(0.0, 0.0)) < 1e-12);
        CHECK(std::abs(pts[1].point - Complex(1.0, 0.0)) < 1e-12);
        CHECK(std::abs(pts[0].multiplier) < 1e-10);
        CHECK(std::abs(pts[1].multiplier - Complex(2.0, 0.0)) < 1e-10);
    }

    SECTION("period four gives zero and the fifteenth roots of unity") {
        const auto pts = oracle_periodic_points(sq, 4);
        REQUIRE(pts.size() == 16);
        int on_circle = 0, at_zero = 0;
        for (const auto& o : pts) {
            if (std::abs(o.point) < 1e-10) {
                ++at_zero;
                continue;
            }
            ++on_circle;
            CHECK(std::abs(std::pow(o.point, 15) - 1.0) < 1e-9);
            CHECK(std::abs(o.multiplier - Complex(16.0, 0.0)) < 1e-8);
        }
        CHECK(at_zero == 1);
        CHECK(on_circle == 15);
    }

    SECTION("golden-ratio fixed points of z^2 - 1") {
        const MapDescriptor f = make_polynomial(Poly{Complex(-1.0, 0.0), Complex(0.0, 0.0), Complex(1.0, 0.0)});
        const auto pts = oracle_periodic_points(f, 1);
        REQUIRE(pts.size() == 2);
        const double s5 = std::sqrt(5.0);
        CHECK(std::abs(pts[0].point - Complex((1.0 - s5) / 2.0, 0.0)) < 1e-12);
        CHECK(std::abs(pts[1].point - Complex((1.0 + s5) / 2.0, 0.0)) < 1e-12);
        CHECK(std::abs(pts[0].multiplier - Complex(1.0 - s5, 0.0)) < 1e-10);
    }

    SECTION("degree cap and kind restrictions") {
        CHECK_THROWS_AS(oracle_periodic_points(sq, 15), config_error);
        CHECK_THROWS_AS(oracle_periodic_points(make_finite_blaschke({Complex(0.0, 0.0), Complex(-0.5, 0.0)}), 1), config_error);
    }
}

TEST_CASE("boundary seeds land on the component boundary") {
    const MapDescriptor sq = squaring();

    SECTION("preimage pullback of the boundary fixed point") {
        SeedParams sp;
        sp.rng_seed = 9;
        sp.repeller = Complex(1.0, 0.0);
        sp.depth = 4;
        const Complex x = boundary_seed(sq, SeedMethod::repelling_preimage, sp);
        CHECK(std::abs(std::abs(x) - 1.0) < 1e-12);
        CHECK(std::abs(detail::pow_int(x, 16) - Complex(1.0, 0.0)) < 1e-10);
    }

    SECTION("different seeds explore different preimages") {
        SeedParams sp;
        sp.repeller = Complex(1.0, 0.0);
        sp.depth = 6;
        sp.rng_seed = 1;
        const Complex a = boundary_seed(sq, SeedMethod::repelling_preimage, sp);
        sp.rng_seed = 2;
        const Complex b = boundary_seed(sq, SeedMethod::repelling_preimage, sp);
        CHECK(std::abs(a - b) > 1e-6);
    }

    SECTION("walk seed straddles the basin boundary") {
        SeedParams sp;
        sp.rng_seed = 3;
        sp.attractor = Complex(0.0, 0.0);
        sp.walk_base = Complex(0.0, 0.0);
        const Complex x = boundary_seed(sq, SeedMethod::harmonic_walk, sp);
        CHECK(std::abs(std::abs(x) - 1.0) < 1e-6);
    }

    SECTION("walk seed on the perturbed basin straddles membership") {
        const MapDescriptor f = perturbed_squaring();
        const Complex attractor((1.0 - std::sqrt(0.2)) / 2.0, 0.0);
        SeedParams sp;
        sp.rng_seed = 5;
        sp.attractor = attractor;
        sp.walk_base = attractor;
        const Complex x = boundary_seed(f, SeedMethod::harmonic_walk, sp);

        const DomainOracle dom = make_fatou_oracle(f, attractor, attractor);
        int inside = 0, outside = 0;
        for (int k = 0; k < 8; ++k) {
            const Complex probe = x + std::polar(2e-6, 2.0 * kPi * k / 8.0);
            if (domain_membership(dom, probe) == Membership::inside) ++inside;
            else ++outside;
        }
        CHECK(inside > 0);
        CHECK(outside > 0);
    }

    SECTION("rejects a non-repelling marker") {
        SeedParams sp;
        sp.repeller = Complex(0.0, 0.0);  // fixed but superattracting
        CHECK_THROWS_AS(boundary_seed(sq, SeedMethod::repelling_preimage, sp), config_error);
        sp.repeller = Complex(0.5, 0.0);  // not fixed at all
        CHECK_THROWS_AS(boundary_seed(sq, SeedMethod::repelling_preimage, sp), config_error);
    }
}

TEST_CASE("contracting returns at the boundary fixed point") {
    const MapDescriptor sq = squaring();

    SECTION("period two is the first contracting return at 1") {
        const ReturnSearch rs = find_contracting_return(sq, Complex(1.0, 0.0), 0.1, 8);
        REQUIRE(rs.found);
        CHECK(rs.period == 2);  // period one returns but 1/2 is not below 1/3
        CHECK_FALSE(rs.recentred);
        CHECK(rs.return_distance < 1e-12);
        CHECK(rs.inverse_derivative_product == Catch::Approx(0.25).margin(1e-12));
        REQUIRE(rs.chain.anchor.size() == 3);
        CHECK(verify_branch_chain(rs.chain));
    }

    SECTION("orbit of a fifth root of unity returns after four doublings") {
        const Complex x = std::polar(1.0, 2.0 * kPi / 5.0);
        const ReturnSearch rs = find_contracting_return(sq, x, 0.1, 8);
        REQUIRE(rs.found);
        CHECK(rs.period == 4);  // 2^4 = 16 = 1 mod 5
        CHECK_FALSE(rs.recentred);
        CHECK(rs.return_distance < 1e-9);
    }

    SECTION("a dyadic angle never returns forward but recentres onto a periodic orbit") {
        const Complex x = std::polar(1.0, 2.0 * kPi * 3.0 / 64.0);
        const ReturnSearch rs = find_contracting_return(sq, x, 0.1, 12);
        REQUIRE(rs.found);
        CHECK(rs.recentred);
        CHECK(rs.return_distance < 0.1 / 3.0);
        const Complex p = rs.chain.anchor.front();
        const double order = std::pow(2.0, rs.period) - 1.0;
        CHECK(std::abs(std::pow(p, order) - 1.0) < 1e-9);
    }

    SECTION("an interior point reports failure") {
        const ReturnSearch rs = find_contracting_return(sq, Complex(0.5, 0.0), 0.05, 8);
        CHECK_FALSE(rs.found);
        CHECK_FALSE(rs.failure.empty());
    }

    SECTION("orbit through the critical disk is rejected") {
        const ReturnSearch rs = find_contracting_return(sq, Complex(0.05, 0.0), 0.1, 6);
        CHECK_FALSE(rs.found);
        CHECK(rs.failure.find("critical") != std::string::npos);
    }
}

TEST_CASE("pullback certificates at closed-form points") {
    const MapDescriptor sq = squaring();

    SECTION("the fixed point certifies with multiplier four at period two") {
        const ReturnSearch rs = find_contracting_return(sq, Complex(1.0, 0.0), 0.1, 8);
        REQUIRE(rs.found);
        const PeriodicPointCertificate cert =
            pullback_fixed_point(rs.chain, 0.1, Complex(0.98, 0.0));
        CHECK(std::abs(cert.point - Complex(1.0, 0.0)) < 1e-12);
        CHECK(cert.period == 2);
        CHECK(std::abs(cert.multiplier - Complex(4.0, 0.0)) < 1e-10);
        CHECK(cert.residual < 1e-12);
        CHECK(cert.contraction_ratio < 1.0);
        CHECK(cert.landing_orbit.size() >= 3);
        REQUIRE(cert.anchor.size() == 3);
    }

    SECTION("a seed near angle 2 pi / 15 lands on the order-15 root of unity") {
        const Complex target = std::polar(1.0, 2.0 * kPi / 15.0);
        const Complex x = std::polar(1.0, 2.0 * kPi / 15.0 + 0.005);
        const ReturnSearch rs = find_contracting_return(sq, x, 0.25, 8);
        REQUIRE(rs.found);
        CHECK(rs.period == 4);
        const PeriodicPointCertificate cert = pullback_fixed_point(rs.chain, 0.25, x);
        CHECK(std::abs(cert.point - target) < 1e-9);
        CHECK(std::abs(cert.multiplier - Complex(16.0, 0.0)) < 1e-8);
    }

    SECTION("golden-ratio repelling fixed point of z^2 - 1") {
        const MapDescriptor f = make_polynomial(Poly{Complex(-1.0, 0.0), Complex(0.0, 0.0), Complex(1.0, 0.0)});
        const double s5 = std::sqrt(5.0);
        const Complex p_exact((1.0 - s5) / 2.0, 0.0);

        // the inverse-derivative product at the fixed point is 1/(s5-1) ~ 0.81,
        // so relax the contraction bound and let the pullback do the certifying
        const ReturnSearch rs = find_contracting_return(f, p_exact, 0.1, 4, 1.0 / 3.0, 0.9);
        REQUIRE(rs.found);
        CHECK(rs.period == 1);
        const PeriodicPointCertificate cert =
            pullback_fixed_point(rs.chain, 0.1, p_exact + Complex(0.02, 0.0));
        CHECK(std::abs(cert.point - p_exact) < 1e-10);
        CHECK(std::abs(cert.multiplier - Complex(1.0 - s5, 0.0)) < 1e-9);
        CHECK(std::abs(cert.multiplier) == Catch::Approx(s5 - 1.0).margin(1e-9));
        CHECK(cert.contraction_ratio < 1.0);

        const auto oracle = oracle_periodic_points(f, 1);
        CHECK(min_oracle_distance(oracle, cert.point) < 1e-10);
    }

    SECTION("start outside the disk is rejected") {
        const ReturnSearch rs = find_contracting_return(sq, Complex(1.0, 0.0), 0.1, 8);
        REQUIRE(rs.found);
        CHECK_THROWS_AS(pullback_fixed_point(rs.chain, 0.1, Complex(0.5, 0.0)), config_error);
    }
}

TEST_CASE("density sweep over the squaring basin certifies roots of unity") {
    const MapDescriptor sq = squaring();
    DensityParams dp;
    dp.seeds = 64;
    dp.delta = 0.1;
    dp.max_period = 12;
    dp.radius = 0.1;
    dp.plan = SeedPlan::uniform_circle;
    const DensityReport rep = density_experiment(sq, dp);

    CHECK(rep.success_fraction == 1.0);
    REQUIRE(rep.certificates.size() == 64);
    for (const PeriodicPointCertificate& cert : rep.certificates) {
        const double order = std::pow(2.0, cert.period) - 1.0;
        CHECK(std::abs(std::pow(cert.point, order) - 1.0) < 1e-9);
        CHECK(std::abs(cert.multiplier) == Catch::Approx(std::pow(2.0, cert.period)).epsilon(1e-9));
        CHECK(cert.residual < 1e-9);
        CHECK(cert.contraction_ratio < 1.0);
    }

    SECTION("weakening the locality requirement cannot lose successes") {
        DensityParams loose = dp;
        loose.delta = 2.0;
        const DensityReport rep2 = density_experiment(sq, loose);
        CHECK(rep2.success_fraction >= rep.success_fraction);
    }
}

TEST_CASE("density sweep on the perturbed basin cross-checks the polynomial oracle") {
    const MapDescriptor f = perturbed_squaring();
    const Complex attractor((1.0 - std::sqrt(0.2)) / 2.0, 0.0);

    DensityParams dp;
    dp.seeds = 32;
    dp.delta = 0.1;
    dp.max_period = 10;
    dp.radius = 0.1;
    dp.plan = SeedPlan::straddle_walk;
    dp.rng_seed = 17;
    dp.attractor = attractor;
    dp.walk_base = attractor;
    const DensityReport rep = density_experiment(f, dp);

    CHECK(rep.success_fraction >= 0.5);
    REQUIRE(!rep.certificates.empty());

    std::map<int, std::vector<OraclePoint>> oracle_by_period;
    for (const PeriodicPointCertificate& cert : rep.certificates) {
        CHECK(cert.residual < 1e-9);
        CHECK(std::abs(cert.multiplier) > 1.0 + 1e-6);
        CHECK(cert.contraction_ratio < 1.0);
        CHECK(!cert.anchor.empty());
        CHECK(cert.landing_orbit.size() >= 2);

        auto it = oracle_by_period.find(cert.period);
        if (it == oracle_by_period.end())
            it = oracle_by_period.emplace(cert.period, oracle_periodic_points(f, cert.period)).first;
        CHECK(min_oracle_distance(it->second, cert.point) < 1e-8);
    }
}

TEST_CASE("density experiments are deterministic per seed") {
    const MapDescriptor f = perturbed_squaring();
    const Complex attractor((1.0 - std::sqrt(0.2)) / 2.0, 0.0);

    DensityParams dp;
    dp.seeds = 8;
    dp.delta = 0.1;
    dp.max_period = 10;
    dp.plan = SeedPlan::straddle_walk;
    dp.rng_seed = 23;
    dp.attractor = attractor;
    dp.walk_base = attractor;

    const DensityReport a = density_experiment(f, dp);
    const DensityReport b = density_experiment(f, dp);
    REQUIRE(a.certificates.size() == b.certificates.size());
    for (std::size_t i = 0; i < a.certificates.size(); ++i) {
        CHECK(a.certificates[i].point == b.certificates[i].point);
        CHECK(a.certificates[i].multiplier == b.certificates[i].multiplier);
        CHECK(a.certificates[i].period == b.certificates[i].period);
    }
    REQUIRE(a.seed_points.size() == b.seed_points.size());
    for (std::size_t i = 0; i < a.seed_points.size(); ++i)
        CHECK(a.seed_points[i] == b.seed_points[i]);
}
