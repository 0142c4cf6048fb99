#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "innerdyn/innerdyn.hpp"

using namespace innerdyn;

TEST_CASE("fnv1a matches the published test vectors") {
    CHECK(fnv1a_hash("") == 14695981039346656037ull);
    CHECK(fnv1a_hash("a") == 0xaf63dc4c8601ec8cull);
    CHECK(fnv1a_hash("foobar") == 0x85944171f73967e8ull);
    CHECK(hash_hex(fnv1a_hash("foobar")) == "85944171f73967e8");
}

TEST_CASE("atomic writes leave exactly the target file") {
    const std::string path = "report_io_test_scratch.txt";
    write_file_atomic(path, "first\n");
    write_file_atomic(path, "second\n");

    std::ifstream in(path);
    std::stringstream got;
    got << in.rdbuf();
    CHECK(got.str() == "second\n");

    std::ifstream tmp(path + ".tmp");
    CHECK_FALSE(tmp.good());
    std::remove(path.c_str());
}

TEST_CASE("sample CSV round-trips hit coordinates exactly") {
    WalkParams p;
    p.walks = 5;
    p.rng_seed = 77;
    const HarmonicSampleSet set = harmonic_sample(make_disk_oracle(Complex(0.3, -0.2)), p);
    const std::string csv = samples_csv(set);

    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "walk_index,hit_re,hit_im,steps");
    for (std::size_t i = 0; i < set.hits.size(); ++i) {
        REQUIRE(std::getline(lines, line));
        std::size_t c1 = line.find(','), c2 = line.find(',', c1 + 1), c3 = line.find(',', c2 + 1);
        CHECK(std::stoul(line.substr(0, c1)) == i);
        CHECK(std::strtod(line.substr(c1 + 1, c2 - c1 - 1).c_str(), nullptr) == set.hits[i].real());
        CHECK(std::strtod(line.substr(c2 + 1, c3 - c2 - 1).c_str(), nullptr) == set.hits[i].imag());
        CHECK(std::stol(line.substr(c3 + 1)) == set.steps[i]);
    }
    CHECK_FALSE(std::getline(lines, line));

    CHECK(samples_csv(set) == csv);
}

TEST_CASE("sample SVG is deterministic and carries no timestamps") {
    WalkParams p;
    p.walks = 32;
    p.rng_seed = 3;
    const HarmonicSampleSet set = harmonic_sample(make_disk_oracle(0.0), p);
    const std::string svg = samples_svg(set);

    CHECK(svg.rfind("<svg", 0) == 0);
    std::size_t count = 0, pos = 0;
    while ((pos = svg.find("<circle", pos)) != std::string::npos) { ++count; ++pos; }
    CHECK(count == set.hits.size());
    CHECK(svg.find("timestamp") == std::string::npos);
    CHECK(svg.find("date") == std::string::npos);
    CHECK(samples_svg(set) == svg);
}

TEST_CASE("certificate JSON carries the full certificate") {
    const MapDescriptor sq = make_power(2);
    const ReturnSearch rs = find_contracting_return(sq, Complex(1.0, 0.0), 0.1, 8);
    REQUIRE(rs.found);
    const PeriodicPointCertificate cert = pullback_fixed_point(rs.chain, 0.1, Complex(0.98, 0.0));

    const ordered_json j = certificate_json(cert);
    CHECK(j["period"] == 2);
    CHECK(j["point"][0].get<double>() == cert.point.real());
    CHECK(j["point"][1].get<double>() == cert.point.imag());
    CHECK(j["multiplier"][0].get<double>() == cert.multiplier.real());
    CHECK(j["residual"].get<double>() == cert.residual);
    CHECK(j["contraction_ratio"].get<double>() == cert.contraction_ratio);
    CHECK(j["anchor"].size() == cert.anchor.size());
    CHECK(j["landing_orbit"].size() == cert.landing_orbit.size());
}

TEST_CASE("density report JSON is byte-stable run to run") {
    const MapDescriptor sq = make_power(2);
    DensityParams dp;
    dp.seeds = 8;
    dp.max_period = 12;
    const DensityReport a = density_experiment(sq, dp);
    const DensityReport b = density_experiment(sq, dp);

    const std::string ja = density_report_json(a, fnv1a_hash("config")).dump(2);
    const std::string jb = density_report_json(b, fnv1a_hash("config")).dump(2);
    CHECK(ja == jb);

    const ordered_json j = ordered_json::parse(ja);
    CHECK(j["seeds"] == 8);
    CHECK(j["config_hash"] == hash_hex(fnv1a_hash("config")));
    CHECK(j["success_fraction"].get<double>() == a.success_fraction);
    CHECK(j["certificates"].size() == a.certificates.size());

    CHECK(certificates_csv(a) == certificates_csv(b));
    const std::string csv = certificates_csv(a);
    CHECK(csv.rfind("seed,period,", 0) == 0);
}
