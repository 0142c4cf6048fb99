#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "innerdyn/innerdyn.hpp"

namespace {

using innerdyn::Complex;
using innerdyn::config_error;
using innerdyn::numeric_error;
using innerdyn::ordered_json;

constexpr const char* kToolName = "innerdyn-cli";
constexpr const char* kToolVersion = "0.1.0";

// ---------- config plumbing ----------

ordered_json load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error("config is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw config_error("config root must be a JSON object");
    return j;
}

void require_keys(const ordered_json& obj, const std::vector<std::string>& allowed,
                  const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const auto& k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok) throw config_error("unknown key \"" + it.key() + "\" in " + where);
    }
}

const ordered_json& need(const ordered_json& obj, const std::string& key,
                         const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw config_error("missing key \"" + key + "\" in " + where);
    return *it;
}

Complex parse_complex(const ordered_json& j, const std::string& where) {
    if (j.is_number()) return Complex{j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Complex{j[0].get<double>(), j[1].get<double>()};
    throw config_error(where + " must be a number or a [re, im] pair");
}

std::vector<Complex> parse_complex_list(const ordered_json& j, const std::string& where) {
    if (!j.is_array()) throw config_error(where + " must be an array");
    std::vector<Complex> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_complex(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

double parse_number(const ordered_json& j, const std::string& where) {
    if (!j.is_number()) throw config_error(where + " must be a number");
    return j.get<double>();
}

int parse_int(const ordered_json& j, const std::string& where) {
    if (!j.is_number_integer()) throw config_error(where + " must be an integer");
    return j.get<int>();
}

double opt_number(const ordered_json& obj, const std::string& key, double fallback) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : parse_number(*it, key);
}

int opt_int(const ordered_json& obj, const std::string& key, int fallback) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : parse_int(*it, key);
}

innerdyn::MapDescriptor parse_map(const ordered_json& j) {
    if (!j.is_object()) throw config_error("\"map\" must be a JSON object");
    const std::string kind = need(j, "kind", "map").get<std::string>();
    if (kind == "power") {
        require_keys(j, {"kind", "degree"}, "map");
        return innerdyn::make_power(parse_int(need(j, "degree", "map"), "map.degree"));
    }
    if (kind == "polynomial") {
        require_keys(j, {"kind", "coefficients"}, "map");
        return innerdyn::make_polynomial(
            parse_complex_list(need(j, "coefficients", "map"), "map.coefficients"));
    }
    if (kind == "rational") {
        require_keys(j, {"kind", "numerator", "denominator"}, "map");
        return innerdyn::make_rational(
            parse_complex_list(need(j, "numerator", "map"), "map.numerator"),
            parse_complex_list(need(j, "denominator", "map"), "map.denominator"));
    }
    if (kind == "finite_blaschke") {
        require_keys(j, {"kind", "zeros", "rotation"}, "map");
        Complex rot{1.0, 0.0};
        if (j.contains("rotation")) rot = parse_complex(j["rotation"], "map.rotation");
        return innerdyn::make_finite_blaschke(
            parse_complex_list(need(j, "zeros", "map"), "map.zeros"), rot);
    }
    if (kind == "infinite_blaschke") {
        require_keys(j, {"kind", "c", "q"}, "map");
        innerdyn::BlaschkeZeroRule rule;
        rule.c = opt_number(j, "c", rule.c);
        rule.q = opt_number(j, "q", rule.q);
        return innerdyn::make_infinite_blaschke(rule);
    }
    if (kind == "halfplane") {
        require_keys(j, {"kind", "a", "b", "c", "d"}, "map");
        return innerdyn::make_halfplane_model(parse_complex(need(j, "a", "map"), "map.a"),
                                              parse_complex(need(j, "b", "map"), "map.b"),
                                              parse_complex(need(j, "c", "map"), "map.c"),
                                              parse_complex(need(j, "d", "map"), "map.d"));
    }
    if (kind == "baker") {
        require_keys(j, {"kind"}, "map");
        return innerdyn::make_baker();
    }
    if (kind == "newton") {
        require_keys(j, {"kind", "target"}, "map");
        return innerdyn::make_newton(parse_complex_list(need(j, "target", "map"), "map.target"));
    }
    throw config_error("unknown map kind \"" + kind + "\"");
}

// Accepts either "angle" (radians) or "<key>" as [re, im]; exactly one.
Complex parse_circle_point(const ordered_json& cfg, const std::string& key) {
    const bool has_angle = cfg.contains("angle");
    const bool has_point = cfg.contains(key);
    if (has_angle == has_point)
        throw config_error("give exactly one of \"angle\" and \"" + key + "\"");
    if (has_angle) {
        const double th = parse_number(cfg["angle"], "angle");
        return std::polar(1.0, th);
    }
    return parse_complex(cfg[key], key);
}

// ---------- run context ----------

struct RunContext {
    ordered_json config;
    std::string subcommand;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    int threads = 1;
    bool dry_run = false;
    std::uint64_t config_hash = 0;
    // extra artefacts beside report.json, name -> content
    std::vector<std::pair<std::string, std::string>> files;
};

std::uint64_t effective_seed(const ordered_json& cfg, bool seed_given, std::uint64_t flag_seed) {
    if (seed_given) return flag_seed;
    auto it = cfg.find("rng_seed");
    if (it == cfg.end()) return 1;
    if (!it->is_number_unsigned() && !it->is_number_integer())
        throw config_error("rng_seed must be a non-negative integer");
    return it->get<std::uint64_t>();
}

void emit(const RunContext& ctx, const ordered_json& result, double wall_ms) {
    namespace fs = std::filesystem;
    fs::create_directories(ctx.out_dir);
    const std::string hex = innerdyn::hash_hex(ctx.config_hash);

    ordered_json report;
    report["subcommand"] = ctx.subcommand;
    report["config"] = ctx.config;
    report["config_hash"] = hex;
    report["seed"] = ctx.seed;
    report["result"] = result;
    innerdyn::write_file_atomic((fs::path(ctx.out_dir) / "report.json").string(),
                                report.dump(2) + "\n");

    for (const auto& [name, content] : ctx.files)
        innerdyn::write_file_atomic((fs::path(ctx.out_dir) / name).string(), content);

    // wall time lives here and only here; report.json stays a pure function
    // of config and seed
    ordered_json manifest;
    manifest["tool"] = kToolName;
    manifest["version"] = kToolVersion;
    manifest["subcommand"] = ctx.subcommand;
    manifest["config_hash"] = hex;
    manifest["seed"] = ctx.seed;
    manifest["wall_time_ms"] = wall_ms;
    innerdyn::write_file_atomic((fs::path(ctx.out_dir) / "manifest.json").string(),
                                manifest.dump(2) + "\n");
}

// ---------- subcommand handlers ----------
// Each handler validates its whole config before computing so --dry-run
// exercises the same checks as a real run.

ordered_json run_classify_inner(const ordered_json& cfg, RunContext& ctx) {
    require_keys(cfg, {"map"}, "config");
    const auto f = parse_map(need(cfg, "map", "config"));
    if (ctx.dry_run) return {};
    const auto cls = innerdyn::cowen_classify(f);
    const char* names[] = {"elliptic", "hyperbolic", "simply_parabolic", "doubly_parabolic"};
    ordered_json out;
    out["type"] = names[static_cast<int>(cls.type)];
    out["dw"] = innerdyn::json_complex(cls.dw.point);
    out["on_boundary"] = cls.dw.on_boundary;
    out["multiplier"] = innerdyn::json_complex(cls.dw.multiplier);
    out["step_limit"] = cls.step_limit;
    return out;
}

ordered_json run_dw_point(const ordered_json& cfg, RunContext& ctx) {
    require_keys(cfg, {"map"}, "config");
    const auto f = parse_map(need(cfg, "map", "config"));
    if (ctx.dry_run) return {};
    const auto dw = innerdyn::denjoy_wolff(f);
    ordered_json out;
    out["dw"] = innerdyn::json_complex(dw.point);
    out["on_boundary"] = dw.on_boundary;
    out["multiplier"] = innerdyn::json_complex(dw.multiplier);
    out["residual"] = dw.residual;
    out["iterations"] = dw.iterations;
    return out;
}

ordered_json run_orbit(const ordered_json& cfg, RunContext& ctx) {
    require_keys(cfg, {"map", "start", "max_steps", "escape_radius"}, "config");
    const auto f = parse_map(need(cfg, "map", "config"));
    const Complex z0 = parse_complex(need(cfg, "start", "config"), "start");
    innerdyn::OrbitOptions opt;
    opt.max_steps = opt_int(cfg, "max_steps", opt.max_steps);
    opt.escape_radius = opt_number(cfg, "escape_radius", opt.escape_radius);
    if (opt.max_steps < 1) throw config_error("max_steps must be positive");
    if (ctx.dry_run) return {};
    const auto res = innerdyn::orbit(f, z0, opt);
    ordered_json out;
    out["status"] = innerdyn::orbit_status_name(res.status);
    out["steps"] = res.steps;
    out["cycle_length"] = res.cycle_length;
    out["terminal"] = innerdyn::json_complex(res.terminal);
    ordered_json pts = ordered_json::array();
    const std::size_t cap = std::min<std::size_t>(res.points.size(), 256);
    for (std::size_t i = 0; i < cap; ++i) pts.push_back(innerdyn::json_complex(res.points[i]));
    out["points"] = pts;
    out["points_truncated"] = res.points.size() > cap;
    return out;
}

ordered_json run_radial_limit(const ordered_json& cfg, RunContext& ctx) {
    require_keys(cfg, {"map", "angle", "xi", "max_depth", "tol"}, "config");
    const auto f = parse_map(need(cfg, "map", "config"));
    const Complex xi = parse_circle_point(cfg, "xi");
    innerdyn::RadialLimitOptions opt;
    opt.max_depth = opt_int(cfg, "max_depth", opt.max_depth);
    opt.tol = opt_number(cfg, "tol", opt.tol);
    if (ctx.dry_run) return {};
    const auto res = innerdyn::radial_limit(f, xi, opt);
    ordered_json out;
    out["xi"] = innerdyn::json_complex(xi);
    out["value"] = innerdyn::json_complex(res.value);
    out["converged"] = res.converged;
    out["unimodular"] = res.unimodular;
    out["interior_value"] = res.interior_value;
    out["residual"] = res.residual;
    out["samples_used"] = res.samples_used;
    out["note"] = res.note;
    return out;
}

ordered_json run_singularity_scan(const ordered_json& cfg, RunContext& ctx) {
    require_keys(cfg, {"map", "angles", "points", "diameter", "samples", "rng_seed"}, "config");
    const auto f = parse_map(need(cfg, "map", "config"));
    std::vector<Complex> candidates;
    if (cfg.contains("angles"))
        for (const auto& a : cfg["angles"])
            candidates.push_back(std::polar(1.0, parse_number(a, "angles entry")));
    if (cfg.contains("points"))
        for (const auto& p : parse_complex_list(cfg["points"], "points"))
            candidates.push_back(p);
    if (candidates.empty()) throw config_error("need \"angles\" or \"points\" to scan");
    innerdyn::SingularityProbeOptions opt;
    opt.diameter = opt_number(cfg, "diameter", opt.diameter);
    opt.samples = opt_int(cfg, "samples", opt.samples);
    opt.seed = ctx.seed;
    if (ctx.dry_run) return {};
    ordered_json probes = ordered_json::array();
    for (const Complex xi : candidates) {
        const auto pr = innerdyn::singularity_probe(f, xi, opt);
        ordered_json p;
        p["xi"] = innerdyn::json_complex(pr.xi);
        p["singular"] = pr.singular;
        p["min_modulus"] = pr.min_modulus;
        p["small_fraction"] = pr.small_fraction;
        p["samples"] = pr.samples;
        probes.push_back(p);
    }
    ordered_json out;
    out["probes"] = probes;
    return out;
}

ordered_json run_distortion_check(const ordered_json& cfg, RunContext& ctx) {
    require_keys(cfg, {"r", "check_samples"}, "config");
    const double r = parse_number(need(cfg, "r", "config"), "r");
    const int samples = opt_int(cfg, "check_samples", 0);
    if (samples < 0) throw config_error("check_samples must be non-negative");
    if (!(r >= 0.0) || r >= 1.0) throw config_error("r must satisfy 0 <= r < 1");
    if (ctx.dry_run) return {};
    ordered_json out;
    out["r"] = r;
    out["constant"] = innerdyn::distortion_constant(r);
    if (samples > 0) {
        // Koebe map z/(1-z)^2 on the unit disk, the extremal for the bound
        auto koebe = [](Complex z) { return z / ((1.0 - z) * (1.0 - z)); };
        const auto chk =
            innerdyn::distortion_bound_check(koebe, Complex{0.0, 0.0}, Complex{1.0, 0.0}, 1.0, r,
                                             samples, ctx.seed);
        out["check_samples"] = chk.samples;
        out["max_violation"] = chk.max_violation;
        out["bound_holds"] = chk.max_violation <= 0.0;
    }
    return out;
}

ordered_json run_stolz_check(const ordered_json& cfg, RunContext& ctx) {
    require_keys(cfg, {"map", "angle", "xi", "p", "alpha", "rho", "depth", "samples"}, "config");
    const auto f = parse_map(need(cfg, "map", "config"));
    const Complex xi = parse_circle_point(cfg, "xi");
    const Complex p = parse_complex(need(cfg, "p", "config"), "p");
    const double alpha = parse_number(need(cfg, "alpha", "config"), "alpha");
    const double rho = parse_number(need(cfg, "rho", "config"), "rho");
    const int depth = parse_int(need(cfg, "depth", "config"), "depth");
    const int samples = opt_int(cfg, "samples", 64);
    if (depth < 1) throw config_error("depth must be positive");
    if (ctx.dry_run) return {};
    ordered_json depths = ordered_json::array();
    bool all = true;
    for (int n = 1; n <= depth; ++n) {
        const auto rep = innerdyn::stolz_containment_check(f, xi, p, alpha, rho, n, samples);
        ordered_json d;
        d["depth"] = n;
        d["contained"] = rep.contained;
        d["max_angle"] = rep.max_angle;
        d["obstructions"] = rep.obstructions;
        d["branch_vertex"] = innerdyn::json_complex(rep.branch_vertex);
        depths.push_back(d);
        all = all && rep.contained;
    }
    ordered_json out;
    out["alpha"] = alpha;
    out["rho"] = rho;
    out["all_contained"] = all;
    out["depths"] = depths;
    return out;
}

ordered_json run_rho0(const ordered_json& cfg, RunContext& ctx) {
    require_keys(cfg, {"map", "angle", "xi", "depth", "cap"}, "config");
    const auto f = parse_map(need(cfg, "map", "config"));
    const Complex xi = parse_circle_point(cfg, "xi");
    const int depth = parse_int(need(cfg, "depth", "config"), "depth");
    innerdyn::RadiusOptions opt;
    opt.cap = opt_number(cfg, "cap", opt.cap);
    if (depth < 0) throw config_error("depth must be non-negative");
    if (ctx.dry_run) return {};
    const auto est = innerdyn::well_definedness_radius(f, xi, depth, opt);
    ordered_json out;
    out["xi"] = innerdyn::json_complex(est.xi);
    out["depth"] = est.depth;
    out["rho0"] = est.rho0;
    out["degenerate"] = est.degenerate;
    out["validated"] = est.validated;
    out["validation_chains"] = est.validation_chains;
    out["cloud_size"] = est.cloud_size;
    return out;
}

ordered_json run_harmonic_sample(const ordered_json& cfg, RunContext& ctx) {
    require_keys(cfg,
                 {"domain", "walks", "step", "absorb_band", "max_steps", "rng_seed"},
                 "config");
    const auto& dj = need(cfg, "domain", "config");
    if (!dj.is_object()) throw config_error("\"domain\" must be a JSON object");
    const std::string kind = need(dj, "kind", "domain").get<std::string>();
    innerdyn::DomainOracle dom;
    if (kind == "disk") {
        require_keys(dj, {"kind", "base"}, "domain");
        dom = innerdyn::make_disk_oracle(parse_complex(need(dj, "base", "domain"), "domain.base"));
    } else if (kind == "halfplane") {
        require_keys(dj, {"kind", "base"}, "domain");
        dom = innerdyn::make_halfplane_oracle(
            parse_complex(need(dj, "base", "domain"), "domain.base"));
    } else if (kind == "fatou") {
        require_keys(dj, {"kind", "base", "map", "attractor"}, "domain");
        const auto f = parse_map(need(dj, "map", "domain"));
        Complex attractor = f.attractors.empty() ? Complex{0.0, 0.0} : f.attractors.front();
        if (dj.contains("attractor"))
            attractor = parse_complex(dj["attractor"], "domain.attractor");
        dom = innerdyn::make_fatou_oracle(
            f, attractor, parse_complex(need(dj, "base", "domain"), "domain.base"));
    } else {
        throw config_error("unknown domain kind \"" + kind + "\"");
    }
    innerdyn::WalkParams wp;
    wp.walks = opt_int(cfg, "walks", wp.walks);
    wp.step = opt_number(cfg, "step", wp.step);
    wp.absorb_band = opt_number(cfg, "absorb_band", wp.absorb_band);
    wp.max_steps = opt_int(cfg, "max_steps", static_cast<int>(wp.max_steps));
    wp.rng_seed = ctx.seed;
    if (wp.walks < 1) throw config_error("walks must be positive");
    if (ctx.dry_run) return {};
    const auto set = innerdyn::harmonic_sample(dom, wp);
    double mean_steps = 0.0;
    for (const long s : set.steps) mean_steps += static_cast<double>(s);
    if (!set.steps.empty()) mean_steps /= static_cast<double>(set.steps.size());
    ctx.files.emplace_back("samples.csv", innerdyn::samples_csv(set));
    ctx.files.emplace_back("samples.svg", innerdyn::samples_svg(set));
    ordered_json out;
    out["kind"] = kind;
    out["walks"] = wp.walks;
    out["hits"] = set.hits.size();
    out["timeouts"] = set.timeouts;
    out["mean_steps"] = mean_steps;
    return out;
}

ordered_json run_find_periodic(const ordered_json& cfg, RunContext& ctx) {
    require_keys(cfg,
                 {"map", "x", "radius", "max_period", "return_fraction", "contraction_bound",
                  "attractor", "start"},
                 "config");
    const auto f = parse_map(need(cfg, "map", "config"));
    const Complex x = parse_complex(need(cfg, "x", "config"), "x");
    const double radius = parse_number(need(cfg, "radius", "config"), "radius");
    const int max_period = parse_int(need(cfg, "max_period", "config"), "max_period");
    const double rf = opt_number(cfg, "return_fraction", 1.0 / 3.0);
    const double cb = opt_number(cfg, "contraction_bound", 1.0 / 3.0);
    Complex attractor = f.attractors.empty() ? Complex{0.0, 0.0} : f.attractors.front();
    if (cfg.contains("attractor")) attractor = parse_complex(cfg["attractor"], "attractor");
    if (!(radius > 0.0)) throw config_error("radius must be positive");
    if (max_period < 1) throw config_error("max_period must be positive");
    if (ctx.dry_run) return {};
    const auto search = innerdyn::find_contracting_return(f, x, radius, max_period, rf, cb);
    if (!search.found) throw numeric_error(search.failure);
    Complex start = search.chain.anchor.front();
    start += 0.02 * (attractor - start);
    if (cfg.contains("start")) start = parse_complex(cfg["start"], "start");
    const auto cert = innerdyn::pullback_fixed_point(search.chain, radius, start);
    ordered_json out;
    out["period"] = search.period;
    out["recentred"] = search.recentred;
    out["return_distance"] = search.return_distance;
    out["certificate"] = innerdyn::certificate_json(cert);
    return out;
}

ordered_json run_density_experiment(const ordered_json& cfg, RunContext& ctx) {
    require_keys(cfg,
                 {"map", "seeds", "delta", "max_period", "radius", "plan", "attractor",
                  "walk_base", "walk_step", "return_fraction", "contraction_bound", "rng_seed"},
                 "config");
    const auto f = parse_map(need(cfg, "map", "config"));
    innerdyn::DensityParams dp;
    dp.seeds = parse_int(need(cfg, "seeds", "config"), "seeds");
    dp.delta = parse_number(need(cfg, "delta", "config"), "delta");
    dp.max_period = opt_int(cfg, "max_period", dp.max_period);
    dp.radius = opt_number(cfg, "radius", dp.radius);
    dp.rng_seed = ctx.seed;
    if (cfg.contains("plan")) {
        const std::string plan = cfg["plan"].get<std::string>();
        if (plan == "uniform_circle") dp.plan = innerdyn::SeedPlan::uniform_circle;
        else if (plan == "straddle_walk") dp.plan = innerdyn::SeedPlan::straddle_walk;
        else throw config_error("unknown seed plan \"" + plan + "\"");
    }
    dp.attractor = f.attractors.empty() ? Complex{0.0, 0.0} : f.attractors.front();
    if (cfg.contains("attractor")) dp.attractor = parse_complex(cfg["attractor"], "attractor");
    dp.walk_base = dp.attractor;
    if (cfg.contains("walk_base")) dp.walk_base = parse_complex(cfg["walk_base"], "walk_base");
    dp.walk_step = opt_number(cfg, "walk_step", dp.walk_step);
    dp.return_fraction = opt_number(cfg, "return_fraction", dp.return_fraction);
    dp.contraction_bound = opt_number(cfg, "contraction_bound", dp.contraction_bound);
    if (dp.seeds < 1) throw config_error("seeds must be positive");
    if (!(dp.delta > 0.0)) throw config_error("delta must be positive");
    if (ctx.dry_run) return {};
    const auto rep = innerdyn::density_experiment(f, dp);
    ctx.files.emplace_back("certificates.csv", innerdyn::certificates_csv(rep));
    return innerdyn::density_report_json(rep, ctx.config_hash);
}

ordered_json run_oracle_periodic(const ordered_json& cfg, RunContext& ctx) {
    require_keys(cfg, {"map", "period"}, "config");
    const auto f = parse_map(need(cfg, "map", "config"));
    const int period = parse_int(need(cfg, "period", "config"), "period");
    if (period < 1) throw config_error("period must be positive");
    if (ctx.dry_run) return {};
    const auto pts = innerdyn::oracle_periodic_points(f, period);
    ordered_json arr = ordered_json::array();
    for (const auto& p : pts) {
        ordered_json e;
        e["point"] = innerdyn::json_complex(p.point);
        e["multiplier"] = innerdyn::json_complex(p.multiplier);
        arr.push_back(e);
    }
    ordered_json out;
    out["period"] = period;
    out["count"] = pts.size();
    out["points"] = arr;
    return out;
}

using Handler = ordered_json (*)(const ordered_json&, RunContext&);

const std::map<std::string, std::pair<Handler, const char*>>& handlers() {
    static const std::map<std::string, std::pair<Handler, const char*>> table = {
        {"classify-inner",
         {run_classify_inner, "Denjoy-Wolff classification of an inner function"}},
        {"dw-point", {run_dw_point, "locate the Denjoy-Wolff point"}},
        {"orbit", {run_orbit, "iterate a point and report the orbit outcome"}},
        {"radial-limit", {run_radial_limit, "radial boundary limit at a circle point"}},
        {"singularity-scan",
         {run_singularity_scan, "crosscut density probes for boundary singularities"}},
        {"distortion-check", {run_distortion_check, "distortion constant and bound sampling"}},
        {"stolz-check",
         {run_stolz_check, "Stolz angle containment of pulled-back radial segments"}},
        {"rho0", {run_rho0, "well-definedness radius for inverse branches"}},
        {"harmonic-sample", {run_harmonic_sample, "random-walk harmonic measure samples"}},
        {"find-periodic",
         {run_find_periodic, "boundary periodic point from one working neighbourhood"}},
        {"density-experiment",
         {run_density_experiment, "periodic point search across many boundary seeds"}},
        {"oracle-periodic",
         {run_oracle_periodic, "exact periodic points by polynomial solving"}},
    };
    return table;
}

int run(int argc, char** argv) {
    CLI::App app{"numerical toolkit for boundary dynamics of inner functions"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t flag_seed = 0;
    bool seed_given = false;
    int threads = 1;
    bool dry_run = false;

    for (const auto& [name, entry] : handlers()) {
        CLI::App* sub = app.add_subcommand(name, entry.second);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--seed", flag_seed, "RNG seed override")
            ->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads");
        sub->add_flag("--dry-run", dry_run, "validate the config and exit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    RunContext ctx;
    ctx.subcommand = app.get_subcommands().front()->get_name();
    ctx.out_dir = out_dir;
    ctx.threads = threads;
    ctx.dry_run = dry_run;
    if (ctx.threads < 1) throw config_error("--threads must be at least 1");
    ctx.config = load_config(config_path);
    ctx.seed = effective_seed(ctx.config, seed_given, flag_seed);
    ctx.config_hash =
        innerdyn::fnv1a_hash(ctx.config.dump() + ":" + std::to_string(ctx.seed));

    const auto handler = handlers().at(ctx.subcommand).first;
    const ordered_json result = handler(ctx.config, ctx);
    if (ctx.dry_run) {
        std::printf("config ok: %s\n", innerdyn::hash_hex(ctx.config_hash).c_str());
        return 0;
    }
    const double wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
    emit(ctx, result, wall_ms);
    std::printf("%s: wrote %s/report.json\n", ctx.subcommand.c_str(), ctx.out_dir.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
