#pragma once

// Serialization of experiment results: ordered JSON reports, CSV point dumps,
// SVG scatter plots, atomic file writes, and the config hash that ties a
// report back to the exact inputs that produced it.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "innerdyn/boundary_measure.hpp"
#include "innerdyn/error.hpp"
#include "innerdyn/periodic_finder.hpp"

namespace innerdyn {

using ordered_json = nlohmann::ordered_json;

inline std::uint64_t fnv1a_hash(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (const char c : s) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

// Writes via a temp file in the same directory plus rename, so readers never
// observe a half-written file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("write_file_atomic: cannot open " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw config_error("write_file_atomic: short write to " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw config_error("write_file_atomic: rename failed for " + path);
    }
}

namespace detail {

inline std::string num17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
}

} // namespace detail

inline ordered_json json_complex(Complex z) {
    return ordered_json::array({z.real(), z.imag()});
}

inline ordered_json certificate_json(const PeriodicPointCertificate& cert) {
    ordered_json j;
    j["point"] = json_complex(cert.point);
    j["period"] = cert.period;
    j["multiplier"] = json_complex(cert.multiplier);
    j["residual"] = cert.residual;
    j["contraction_ratio"] = cert.contraction_ratio;
    ordered_json anchor = ordered_json::array();
    for (const Complex& a : cert.anchor) anchor.push_back(json_complex(a));
    j["anchor"] = anchor;
    ordered_json landing = ordered_json::array();
    for (const Complex& a : cert.landing_orbit) landing.push_back(json_complex(a));
    j["landing_orbit"] = landing;
    return j;
}

inline std::string certificates_csv(const DensityReport& rep) {
    std::string out = "seed,period,point_re,point_im,multiplier_re,multiplier_im,residual,contraction_ratio\n";
    for (std::size_t i = 0; i < rep.certificates.size(); ++i) {
        const PeriodicPointCertificate& c = rep.certificates[i];
        out += std::to_string(rep.certified_seed[i]) + "," + std::to_string(c.period) + "," +
               detail::num17(c.point.real()) + "," + detail::num17(c.point.imag()) + "," +
               detail::num17(c.multiplier.real()) + "," + detail::num17(c.multiplier.imag()) + "," +
               detail::num17(c.residual) + "," + detail::num17(c.contraction_ratio) + "\n";
    }
    return out;
}

inline ordered_json density_report_json(const DensityReport& rep, std::uint64_t config_hash) {
    ordered_json j;
    j["config_hash"] = hash_hex(config_hash);
    j["seeds"] = rep.seeds;
    j["successes"] = rep.successes;
    j["success_fraction"] = rep.success_fraction;
    ordered_json hist = ordered_json::object();
    for (const auto& [period, count] : rep.period_histogram)
        hist[std::to_string(period)] = count;
    j["period_histogram"] = hist;
    ordered_json seeds = ordered_json::array();
    for (const Complex& s : rep.seed_points) seeds.push_back(json_complex(s));
    j["seed_points"] = seeds;
    ordered_json certs = ordered_json::array();
    for (std::size_t i = 0; i < rep.certificates.size(); ++i) {
        ordered_json c = certificate_json(rep.certificates[i]);
        c["seed_index"] = rep.certified_seed[i];
        certs.push_back(c);
    }
    j["certificates"] = certs;
    ordered_json fails = ordered_json::array();
    for (std::size_t s = 0; s < rep.failures.size(); ++s) {
        if (rep.failures[s].empty()) continue;
        ordered_json f;
        f["seed_index"] = static_cast<int>(s);
        f["reason"] = rep.failures[s];
        fails.push_back(f);
    }
    j["failures"] = fails;
    return j;
}

// walk_index, hit_re, hit_im, steps; one row per completed walk.
inline std::string samples_csv(const HarmonicSampleSet& set) {
    std::string out = "walk_index,hit_re,hit_im,steps\n";
    for (std::size_t i = 0; i < set.hits.size(); ++i) {
        out += std::to_string(i) + "," +
               detail::num17(set.hits[i].real()) + "," +
               detail::num17(set.hits[i].imag()) + "," +
               std::to_string(set.steps[i]) + "\n";
    }
    return out;
}

// Fixed-size scatter plot of the hit set. Content is a pure function of the
// samples: no timestamps, no environment-dependent strings.
inline std::string samples_svg(const HarmonicSampleSet& set) {
    double max_abs = 1.0;
    for (const Complex& h : set.hits)
        max_abs = std::max({max_abs, std::abs(h.real()), std::abs(h.imag())});
    const double scale = 280.0 / max_abs;
    auto px = [&](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", 300.0 + scale * v);
        return std::string(buf);
    };
    std::string out =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" "
        "viewBox=\"0 0 600 600\">\n"
        "<rect width=\"600\" height=\"600\" fill=\"white\"/>\n"
        "<line x1=\"300\" y1=\"0\" x2=\"300\" y2=\"600\" stroke=\"#ddd\"/>\n"
        "<line x1=\"0\" y1=\"300\" x2=\"600\" y2=\"300\" stroke=\"#ddd\"/>\n";
    for (const Complex& h : set.hits) {
        out += "<circle cx=\"" + px(h.real()) + "\" cy=\"" + px(-h.imag()) +
               "\" r=\"1.2\" fill=\"#1f4e9c\" fill-opacity=\"0.5\"/>\n";
    }
    out += "<text x=\"8\" y=\"590\" font-family=\"monospace\" font-size=\"12\">n=" +
           std::to_string(set.hits.size()) + " timeouts=" + std::to_string(set.timeouts) +
           "</text>\n</svg>\n";
    return out;
}

} // namespace innerdyn
