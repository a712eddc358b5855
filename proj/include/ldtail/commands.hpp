#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldtail/asymptotics.hpp"
#include "ldtail/cgf.hpp"
#include "ldtail/distribution.hpp"
#include "ldtail/errors.hpp"
#include "ldtail/exact_tail.hpp"
#include "ldtail/process.hpp"
#include "ldtail/report.hpp"
#include "ldtail/saddlepoint.hpp"
#include "ldtail/simulate.hpp"

namespace ldtail {

/// Resolved run configuration.  Exactly one of distribution/process is set;
/// exactly one target coordinate kind is given for tail/simulate commands.
struct CliConfig {
    std::optional<DistributionSpec> distribution;
    std::optional<ProcessSpec> process;

    std::vector<double> n_values;  // sum sizes
    std::optional<double> t;       // process horizon

    enum class Target { none, x, c, a, threshold };
    Target target_kind = Target::none;
    std::vector<double> targets;

    std::vector<double> z_grid;  // series command

    std::vector<Method> methods;
    std::size_t samples = 100000;
    std::uint64_t seed = 0;
    int threads = 1;

    std::string out_path;
    std::string format;  // "csv" | "json"; empty = infer from path, default csv

    nlohmann::json raw;  // canonical config for the digest
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                       const std::string& path) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) raise(errc::invalid_argument, "unknown config key: " + path + key);
    }
}

inline double require_number(const nlohmann::json& obj, const char* key,
                             const std::string& path) {
    if (!obj.contains(key) || !obj[key].is_number()) {
        raise(errc::invalid_argument, "missing or non-numeric field: " + path + key);
    }
    return obj[key].get<double>();
}

inline std::vector<std::pair<double, double>> parse_atoms(const nlohmann::json& arr,
                                                          const std::string& path) {
    if (!arr.is_array() || arr.empty()) {
        raise(errc::invalid_argument, "atoms must be a non-empty array: " + path);
    }
    std::vector<std::pair<double, double>> atoms;
    for (const auto& a : arr) {
        if (!a.is_array() || a.size() != 2 || !a[0].is_number() || !a[1].is_number()) {
            raise(errc::invalid_argument, "each atom must be [value, prob]: " + path);
        }
        atoms.emplace_back(a[0].get<double>(), a[1].get<double>());
    }
    return atoms;
}

inline DistributionSpec parse_distribution(const nlohmann::json& d, const std::string& path) {
    if (!d.is_object() || !d.contains("family")) {
        raise(errc::invalid_argument, "distribution needs a family: " + path);
    }
    const std::string family = d["family"].get<std::string>();
    if (family == "centered_bernoulli") {
        check_keys(d, {"family", "p"}, path);
        return DistributionSpec::centered_bernoulli(require_number(d, "p", path));
    }
    if (family == "centered_exponential") {
        check_keys(d, {"family", "rate"}, path);
        return DistributionSpec::centered_exponential(require_number(d, "rate", path));
    }
    if (family == "gaussian") {
        check_keys(d, {"family", "sigma"}, path);
        return DistributionSpec::gaussian(require_number(d, "sigma", path));
    }
    if (family == "lattice") {
        check_keys(d, {"family", "atoms"}, path);
        if (!d.contains("atoms")) raise(errc::invalid_argument, "lattice needs atoms: " + path);
        return DistributionSpec::lattice(parse_atoms(d["atoms"], path + "atoms"));
    }
    raise(errc::invalid_argument, "unknown distribution family: " + family);
}

inline JumpLaw parse_jump_law(const nlohmann::json& d, const std::string& path) {
    if (!d.is_object() || !d.contains("family")) {
        raise(errc::invalid_argument, "jump_law needs a family: " + path);
    }
    const std::string family = d["family"].get<std::string>();
    if (family == "lattice") {
        check_keys(d, {"family", "atoms"}, path);
        return JumpLaw::lattice(parse_atoms(d["atoms"], path + "atoms"));
    }
    if (family == "exponential") {
        check_keys(d, {"family", "rate"}, path);
        return JumpLaw::exponential(require_number(d, "rate", path));
    }
    if (family == "gaussian") {
        check_keys(d, {"family", "mean", "sigma"}, path);
        return JumpLaw::gaussian(require_number(d, "mean", path),
                                 require_number(d, "sigma", path));
    }
    raise(errc::invalid_argument, "unknown jump_law family: " + family);
}

inline std::vector<double> parse_grid(const nlohmann::json& g, const std::string& path) {
    if (g.is_number()) return {g.get<double>()};
    if (g.is_array()) {
        std::vector<double> out;
        for (const auto& v : g) {
            if (!v.is_number()) raise(errc::invalid_argument, "non-numeric grid entry: " + path);
            out.push_back(v.get<double>());
        }
        if (out.empty()) raise(errc::invalid_argument, "empty grid: " + path);
        return out;
    }
    if (g.is_object()) {
        check_keys(g, {"start", "stop", "count", "scale"}, path + ".");
        const double start = require_number(g, "start", path + ".");
        const double stop = require_number(g, "stop", path + ".");
        const int count = static_cast<int>(require_number(g, "count", path + "."));
        if (count < 1) raise(errc::invalid_argument, "grid count must be >= 1: " + path);
        const std::string scale = g.value("scale", "linear");
        std::vector<double> out(static_cast<std::size_t>(count));
        if (scale == "linear") {
            for (int i = 0; i < count; ++i) {
                out[static_cast<std::size_t>(i)] =
                    count == 1 ? start : start + (stop - start) * i / (count - 1);
            }
        } else if (scale == "log") {
            if (!(start > 0.0 && stop > 0.0)) {
                raise(errc::invalid_argument, "log grid needs positive endpoints: " + path);
            }
            const double ls = std::log(start), le = std::log(stop);
            for (int i = 0; i < count; ++i) {
                out[static_cast<std::size_t>(i)] =
                    std::exp(count == 1 ? ls : ls + (le - ls) * i / (count - 1));
            }
        } else {
            raise(errc::invalid_argument, "grid scale must be linear|log: " + path);
        }
        return out;
    }
    raise(errc::invalid_argument, "grid must be number, array or {start,stop,count}: " + path);
}

inline Method parse_method(const std::string& s) {
    for (Method m : {Method::normal, Method::thm1, Method::thm2, Method::thm3, Method::thm6,
                     Method::exact, Method::mc, Method::is}) {
        if (s == to_string(m)) return m;
    }
    raise(errc::invalid_argument, "unknown method tag: " + s);
}

}  // namespace detail

inline CliConfig parse_cli_config(const nlohmann::json& j) {
    if (!j.is_object()) raise(errc::invalid_argument, "config must be a JSON object");
    detail::check_keys(j,
                       {"distribution", "process", "n", "t", "x", "c", "a", "threshold", "z",
                        "methods", "samples", "seed", "threads", "output"},
                       "");
    CliConfig cfg;
    cfg.raw = j;

    if (j.contains("distribution") == j.contains("process")) {
        raise(errc::invalid_argument, "config needs exactly one of distribution/process");
    }
    if (j.contains("distribution")) {
        cfg.distribution = detail::parse_distribution(j["distribution"], "distribution.");
    } else {
        const auto& p = j["process"];
        detail::check_keys(p, {"sigma0_sq", "jump_rate", "jump_law"}, "process.");
        const double s0 = p.value("sigma0_sq", 0.0);
        const double rate = p.value("jump_rate", 0.0);
        std::optional<JumpLaw> law;
        if (p.contains("jump_law")) {
            law = detail::parse_jump_law(p["jump_law"], "process.jump_law.");
        }
        cfg.process = ProcessSpec(s0, rate, std::move(law));
    }

    if (j.contains("n")) {
        cfg.n_values = detail::parse_grid(j["n"], "n");
        for (double n : cfg.n_values) {
            if (!(n >= 1.0) || n != std::floor(n)) {
                raise(errc::invalid_argument, "n entries must be positive integers");
            }
        }
    }
    if (j.contains("t")) {
        cfg.t = detail::require_number(j, "t", "");
        if (!(*cfg.t > 0.0)) raise(errc::invalid_argument, "t must be positive");
    }

    int target_kinds = 0;
    auto take_target = [&](const char* key, CliConfig::Target kind) {
        if (j.contains(key)) {
            ++target_kinds;
            cfg.target_kind = kind;
            cfg.targets = detail::parse_grid(j[key], key);
        }
    };
    take_target("x", CliConfig::Target::x);
    take_target("c", CliConfig::Target::c);
    take_target("a", CliConfig::Target::a);
    take_target("threshold", CliConfig::Target::threshold);
    if (target_kinds > 1) {
        raise(errc::invalid_argument, "give at most one of x/c/a/threshold");
    }

    if (j.contains("z")) cfg.z_grid = detail::parse_grid(j["z"], "z");

    if (j.contains("methods")) {
        if (!j["methods"].is_array()) raise(errc::invalid_argument, "methods must be an array");
        for (const auto& m : j["methods"]) {
            cfg.methods.push_back(detail::parse_method(m.get<std::string>()));
        }
    }
    if (j.contains("samples")) {
        const double s = detail::require_number(j, "samples", "");
        if (!(s >= 100.0)) raise(errc::invalid_argument, "samples must be >= 100");
        cfg.samples = static_cast<std::size_t>(s);
    }
    if (j.contains("seed")) cfg.seed = static_cast<std::uint64_t>(detail::require_number(j, "seed", ""));
    if (j.contains("threads")) {
        cfg.threads = static_cast<int>(detail::require_number(j, "threads", ""));
        if (cfg.threads < 1) raise(errc::invalid_argument, "threads must be >= 1");
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        detail::check_keys(o, {"path", "format"}, "output.");
        cfg.out_path = o.value("path", "");
        cfg.format = o.value("format", "");
        if (!cfg.format.empty() && cfg.format != "csv" && cfg.format != "json") {
            raise(errc::invalid_argument, "output.format must be csv|json");
        }
    }
    return cfg;
}

struct CmdResult {
    RunManifest manifest;
    int errored_rows = 0;
};

namespace detail {

inline RunManifest new_manifest(const CliConfig& cfg) {
    RunManifest m;
    // the digest identifies the computation; where the result lands does not
    // belong in it
    nlohmann::json computational = cfg.raw;
    computational.erase("output");
    m.config_digest = config_digest(computational);
    m.seed = cfg.seed;
    m.timestamp_utc = utc_timestamp();
    return m;
}

inline std::string join_notes(const TailEstimate& e) {
    std::string s = e.error_note;
    for (const auto& v : e.validity) {
        if (!s.empty()) s += "; ";
        s += v;
    }
    return s;
}

inline ResultRow error_row(std::string family, double n_or_t, double x_or_c,
                           std::string method, const Error& err) {
    ResultRow r;
    r.family = std::move(family);
    r.n_or_t = n_or_t;
    r.x_or_c = x_or_c;
    r.method = std::move(method);
    r.value = std::nan("");
    r.error_note = err.what();
    return r;
}

// Coordinates of one tail target for an i.i.d. sum: the standardized x, the
// large-deviation c = x/sqrt(n) and the absolute threshold.
struct SumTarget {
    double x;
    double c;
    double threshold;
};

inline SumTarget resolve_sum_target(CliConfig::Target kind, double v, double sigma, double n) {
    const double sq = std::sqrt(n);
    switch (kind) {
        case CliConfig::Target::x:         return {v, v / sq, sigma * v * sq};
        case CliConfig::Target::c:         return {v * sq, v, sigma * v * n};
        case CliConfig::Target::a:         return {v / sigma * sq, v / sigma, v * n};
        case CliConfig::Target::threshold: return {v / (sigma * sq), v / (sigma * n), v};
        case CliConfig::Target::none:      break;
    }
    raise(errc::invalid_argument, "tail/simulate needs one of x/c/a/threshold");
}

}  // namespace detail

/// rate: per grid point c, the saddle root h, rate exponent alpha, correction
/// lambda(c) and prefactor b0, one row per quantity.
inline CmdResult cmd_rate(const CliConfig& cfg) {
    if (!cfg.distribution) raise(errc::invalid_argument, "rate requires a distribution");
    if (cfg.targets.empty() || cfg.target_kind != CliConfig::Target::c) {
        raise(errc::invalid_argument, "rate requires a c grid");
    }
    CmdResult res;
    res.manifest = detail::new_manifest(cfg);
    const CgfProfile profile(*cfg.distribution);
    const std::string family = cfg.distribution->describe();
    for (double c : cfg.targets) {
        try {
            const SaddleSolution s = solve_saddle(profile, c);
            auto push = [&](const char* tag, double value) {
                res.manifest.rows.push_back({family, 0.0, c, tag, value, "", {}, {}});
            };
            push("h", s.h);
            push("alpha", s.alpha);
            push("lambda", s.lambda_z);
            push("b0", s.b0);
        } catch (const Error& e) {
            res.manifest.rows.push_back(detail::error_row(family, 0.0, c, "alpha", e));
            ++res.errored_rows;
        }
    }
    return res;
}

/// series: lambda series coefficients c0, c1 and a lambda(z) grid dump.
inline CmdResult cmd_series(const CliConfig& cfg) {
    if (!cfg.distribution) raise(errc::invalid_argument, "series requires a distribution");
    CmdResult res;
    res.manifest = detail::new_manifest(cfg);
    const CgfProfile profile(*cfg.distribution);
    const std::string family = cfg.distribution->describe();
    const auto [c0, c1] = lambda_coeffs(profile);
    res.manifest.rows.push_back({family, 0.0, 0.0, "c0", c0, "", {}, {}});
    res.manifest.rows.push_back({family, 0.0, 0.0, "c1", c1, "", {}, {}});
    std::vector<double> grid = cfg.z_grid;
    if (grid.empty()) {
        for (int i = 0; i <= 40; ++i) grid.push_back(-0.2 + 0.01 * i);
    }
    for (double z : grid) {
        try {
            const double lam = std::abs(z) < 1e-8 ? c0 + c1 * z : lambda_fn(profile, z);
            res.manifest.rows.push_back({family, 0.0, z, "lambda", lam, "", {}, {}});
        } catch (const Error& e) {
            res.manifest.rows.push_back(detail::error_row(family, 0.0, z, "lambda", e));
            ++res.errored_rows;
        }
    }
    return res;
}

namespace detail {

// One (n, target, method) tail row for an i.i.d. sum.  Positive targets are
// upper-tail probabilities P(S > threshold); negative ones the lower-tail
// analogs on the negated law.
inline ResultRow sum_tail_row(const CliConfig& cfg, const CgfProfile& profile, double n_d,
                              double coord, const SumTarget& tgt, Method method) {
    const DistributionSpec& spec = profile.spec();
    const std::size_t n = static_cast<std::size_t>(n_d);
    const bool lower = tgt.x < 0.0;
    ResultRow r;
    r.family = spec.describe();
    r.n_or_t = n_d;
    r.x_or_c = coord;
    r.method = to_string(method);
    switch (method) {
        case Method::normal:
            r.value = lower ? normal_cdf(tgt.x) : normal_tail(tgt.x);
            r.error_note = "CLT reference";
            break;
        case Method::thm1: {
            const TailEstimate e = lower ? thm1_lower_ratio(profile, -tgt.x, n)
                                         : thm1_upper_ratio(profile, tgt.x, n);
            r.value = e.value;
            r.error_note = "ratio to normal tail; " + join_notes(e);
            break;
        }
        case Method::thm2: {
            const TailEstimate e = lower ? thm2_ratio(CgfProfile(spec.negated()), -tgt.x, n)
                                         : thm2_ratio(profile, tgt.x, n);
            r.value = e.value;
            r.error_note = "ratio to normal tail; " + join_notes(e);
            break;
        }
        case Method::thm3: {
            const TailEstimate e = lower ? thm3_lower_tail(profile, -tgt.x, n)
                                         : thm3_upper_tail(profile, tgt.x, n);
            r.value = e.value;
            r.error_note = join_notes(e);
            break;
        }
        case Method::thm6: {
            const TailEstimate e = thm6_tail(profile, tgt.c, n);
            r.value = e.value;
            r.error_note = join_notes(e);
            break;
        }
        case Method::exact: {
            const double upper = exact_sum_tail(spec, n, tgt.threshold);
            r.value = lower ? 1.0 - upper : upper;
            r.error_note = "exact";
            break;
        }
        case Method::mc: {
            const SimulationReport rep =
                lower ? naive_mc_tail(spec.negated(), n, -tgt.threshold, cfg.samples, cfg.seed,
                                      cfg.threads)
                      : naive_mc_tail(spec, n, tgt.threshold, cfg.samples, cfg.seed, cfg.threads);
            r.value = rep.estimate;
            r.error_note = stochastic_note(rep.std_error, rep.seed);
            break;
        }
        case Method::is: {
            const SimulationReport rep =
                lower ? tilted_is_tail(CgfProfile(spec.negated()), n, -tgt.threshold,
                                       cfg.samples, cfg.seed, cfg.threads)
                      : tilted_is_tail(profile, n, tgt.threshold, cfg.samples, cfg.seed,
                                       cfg.threads);
            r.value = rep.estimate;
            r.error_note = stochastic_note(rep.std_error, rep.seed);
            if (!rep.note.empty()) r.error_note += "; " + rep.note;
            break;
        }
    }
    return r;
}

// Process analog; target coordinate is converted to c.
inline ResultRow process_tail_row(const CliConfig& cfg, const ProcessSpec& spec, double t,
                                  double coord, double c, Method method) {
    ResultRow r;
    r.family = "process";
    r.n_or_t = t;
    r.x_or_c = coord;
    r.method = to_string(method);
    switch (method) {
        case Method::normal:
            r.value = c < 0.0 ? normal_cdf(c * std::sqrt(t)) : normal_tail(c * std::sqrt(t));
            r.error_note = "CLT reference";
            break;
        case Method::thm6: {
            const TailEstimate e = process_tail(spec, c, t);
            r.value = e.value;
            r.error_note = join_notes(e);
            break;
        }
        case Method::exact: {
            const double upper = process_exact_tail(spec, c, t);
            r.value = c < 0.0 ? 1.0 - upper : upper;
            r.error_note = "exact";
            break;
        }
        case Method::is: {
            const SimulationReport rep =
                process_simulate_tail(spec, c, t, cfg.samples, cfg.seed, cfg.threads);
            r.value = rep.estimate;
            r.error_note = stochastic_note(rep.std_error, rep.seed);
            if (!rep.note.empty()) r.error_note += "; " + rep.note;
            break;
        }
        case Method::mc: {
            const SimulationReport rep = process_simulate_tail_with_tilt(
                spec, c, t, 0.0, cfg.samples, cfg.seed, cfg.threads);
            r.value = rep.estimate;
            r.error_note = stochastic_note(rep.std_error, rep.seed);
            break;
        }
        default:
            raise(errc::unsupported, std::string(to_string(method)) + " not defined for processes");
    }
    return r;
}

}  // namespace detail

/// tail: one row per (n-or-t, target, method); exact (or is/mc) references
/// populate the exact and ratio columns of the probability-form rows sharing
/// the same target.
inline CmdResult cmd_tail(const CliConfig& cfg) {
    if (cfg.targets.empty()) raise(errc::invalid_argument, "tail requires a target grid");
    if (cfg.methods.empty()) raise(errc::invalid_argument, "tail requires a methods list");
    CmdResult res;
    res.manifest = detail::new_manifest(cfg);

    auto finish_group = [&](std::vector<ResultRow>&& group) {
        // reference priority: exact, then is, then mc
        std::optional<double> ref;
        for (const char* tag : {"exact", "is", "mc"}) {
            for (const auto& r : group) {
                if (r.method == tag && !std::isnan(r.value)) {
                    ref = r.value;
                    break;
                }
            }
            if (ref) break;
        }
        if (ref && *ref != 0.0) {
            for (auto& r : group) {
                if (r.method == "thm1" || r.method == "thm2") continue;  // ratio-form rows
                if (std::isnan(r.value)) continue;
                r.exact = *ref;
                r.ratio_to_exact = r.value / *ref;
            }
        }
        for (auto& r : group) res.manifest.rows.push_back(std::move(r));
    };

    if (cfg.distribution) {
        if (cfg.n_values.empty()) raise(errc::invalid_argument, "tail requires n");
        const CgfProfile profile(*cfg.distribution);
        for (double n_d : cfg.n_values) {
            for (double coord : cfg.targets) {
                const detail::SumTarget tgt =
                    detail::resolve_sum_target(cfg.target_kind, coord, profile.sigma(), n_d);
                std::vector<ResultRow> group;
                for (Method m : cfg.methods) {
                    try {
                        group.push_back(detail::sum_tail_row(cfg, profile, n_d, coord, tgt, m));
                    } catch (const Error& e) {
                        group.push_back(detail::error_row(cfg.distribution->describe(), n_d,
                                                          coord, to_string(m), e));
                        ++res.errored_rows;
                    }
                }
                finish_group(std::move(group));
            }
        }
        return res;
    }

    if (!cfg.t) raise(errc::invalid_argument, "process tail requires t");
    const double t = *cfg.t;
    const double sigma = cfg.process->sigma();
    for (double coord : cfg.targets) {
        double c;
        switch (cfg.target_kind) {
            case CliConfig::Target::c:         c = coord; break;
            case CliConfig::Target::x:         c = coord / std::sqrt(t); break;
            case CliConfig::Target::a:         c = coord / sigma; break;
            case CliConfig::Target::threshold: c = coord / (sigma * t); break;
            default: raise(errc::invalid_argument, "tail needs one of x/c/a/threshold");
        }
        std::vector<ResultRow> group;
        for (Method m : cfg.methods) {
            try {
                group.push_back(detail::process_tail_row(cfg, *cfg.process, t, coord, c, m));
            } catch (const Error& e) {
                group.push_back(detail::error_row("process", t, coord, to_string(m), e));
                ++res.errored_rows;
            }
        }
        finish_group(std::move(group));
    }
    return res;
}

/// simulate: thin orchestration over the tilted importance sampler (plus
/// optional mc/exact reference rows) for one or more targets.
inline CmdResult cmd_simulate(const CliConfig& cfg) {
    CliConfig run = cfg;
    if (run.methods.empty()) run.methods = {Method::is};
    for (Method m : run.methods) {
        if (m != Method::is && m != Method::mc && m != Method::exact) {
            raise(errc::invalid_argument, "simulate methods are limited to is/mc/exact");
        }
    }
    return cmd_tail(run);
}

}  // namespace ldtail
