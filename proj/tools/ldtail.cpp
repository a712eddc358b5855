// Command-line front end: rate/tail/simulate/series computations and golden
// comparisons, driven by a JSON config plus --key value dotted-path overrides.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "ldtail/ldtail.hpp"

namespace {

using nlohmann::json;

void print_machine_error(const std::string& code, const std::string& message) {
    json e = {{"error", code}, {"message", message}};
    std::cerr << e.dump() << "\n";
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) ldtail::raise(ldtail::errc::io_error, "cannot open config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        ldtail::raise(ldtail::errc::invalid_argument,
                      "config " + path + " is not valid JSON: " + e.what());
    }
    return j;
}

// Remaining tokens are --dotted.path value pairs overriding the config.
void apply_overrides(json& cfg, const std::vector<std::string>& extras) {
    for (std::size_t i = 0; i < extras.size(); i += 2) {
        const std::string& key = extras[i];
        if (key.rfind("--", 0) != 0 || i + 1 >= extras.size()) {
            ldtail::raise(ldtail::errc::invalid_argument,
                          "overrides must come as --dotted.path value pairs, got: " + key);
        }
        const std::string& value = extras[i + 1];
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::exception&) {
            parsed = value;  // bare string
        }
        json* node = &cfg;
        std::string path = key.substr(2);
        std::size_t pos = 0;
        while (true) {
            const std::size_t dot = path.find('.', pos);
            const std::string part = path.substr(pos, dot - pos);
            if (part.empty()) {
                ldtail::raise(ldtail::errc::invalid_argument, "bad override path: " + key);
            }
            if (dot == std::string::npos) {
                (*node)[part] = parsed;
                break;
            }
            node = &(*node)[part];
            pos = dot + 1;
        }
    }
}

bool color_enabled() {
    return isatty(fileno(stdout)) && std::getenv("NO_COLOR") == nullptr;
}

std::string fmt_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17e", v);
    return buf;
}

void print_table(const ldtail::RunManifest& m) {
    const bool color = color_enabled();
    const char* bold = color ? "\033[1m" : "";
    const char* reset = color ? "\033[0m" : "";
    std::printf("%s%-28s %10s %12s %-8s %-25s %-25s %s%s\n", bold, "family", "n_or_t", "x_or_c",
                "method", "value", "exact", "note", reset);
    for (const auto& r : m.rows) {
        std::printf("%-28s %10g %12g %-8s %-25s %-25s %s\n", r.family.c_str(), r.n_or_t,
                    r.x_or_c, r.method.c_str(), fmt_value(r.value).c_str(),
                    r.exact ? fmt_value(*r.exact).c_str() : "", r.error_note.c_str());
    }
}

std::string pick_format(const ldtail::CliConfig& cfg, const std::string& out_path) {
    if (!cfg.format.empty()) return cfg.format;
    if (out_path.size() > 5 && out_path.substr(out_path.size() - 5) == ".json") return "json";
    return "csv";
}

int write_output(const ldtail::CliConfig& cfg, const ldtail::RunManifest& manifest) {
    print_table(manifest);
    if (cfg.out_path.empty()) return 0;
    const std::string format = pick_format(cfg, cfg.out_path);
    const std::string bytes =
        format == "json" ? ldtail::emit_json(manifest) : ldtail::emit_csv(manifest);
    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) ldtail::raise(ldtail::errc::io_error, "cannot write: " + cfg.out_path);
    out << bytes;
    if (!out) ldtail::raise(ldtail::errc::io_error, "write failed: " + cfg.out_path);
    std::printf("wrote %s (%s, %zu rows)\n", cfg.out_path.c_str(), format.c_str(),
                manifest.rows.size());
    return 0;
}

struct CommonOpts {
    std::string config_path;
    std::string out_path;
    std::string format;
    std::int64_t seed = -1;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file")->required();
    cmd->add_option("--out", opts.out_path, "output file path (overrides config)");
    cmd->add_option("--format", opts.format, "csv|json (overrides config)")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", opts.seed, "random seed (overrides config)");
    cmd->add_option("--threads", opts.threads, "worker threads (overrides config)");
    cmd->allow_extras();
}

ldtail::CliConfig resolve_config(CLI::App* cmd, const CommonOpts& opts) {
    json cfg = load_config(opts.config_path);
    apply_overrides(cfg, cmd->remaining());
    if (!opts.out_path.empty()) cfg["output"]["path"] = opts.out_path;
    if (!opts.format.empty()) cfg["output"]["format"] = opts.format;
    if (opts.seed >= 0) cfg["seed"] = opts.seed;
    if (opts.threads > 0) cfg["threads"] = opts.threads;
    return ldtail::parse_cli_config(cfg);
}

int run_command(const std::string& name, CLI::App* cmd, const CommonOpts& opts) {
    const ldtail::CliConfig cfg = resolve_config(cmd, opts);
    ldtail::CmdResult res;
    if (name == "rate") {
        res = ldtail::cmd_rate(cfg);
    } else if (name == "tail") {
        res = ldtail::cmd_tail(cfg);
    } else if (name == "simulate") {
        res = ldtail::cmd_simulate(cfg);
    } else {
        res = ldtail::cmd_series(cfg);
    }
    write_output(cfg, res.manifest);
    if (res.errored_rows > 0) {
        print_machine_error("ROW_ERRORS",
                            std::to_string(res.errored_rows) + " row(s) failed; see error_note");
        return 1;
    }
    return 0;
}

int run_compare(const std::string& current_path, const std::string& baseline_path,
                double tolerance) {
    auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) ldtail::raise(ldtail::errc::io_error, "cannot open: " + p);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const ldtail::RunManifest current = ldtail::parse_manifest(slurp(current_path));
    const ldtail::DiffReport report =
        ldtail::compare_golden(current, slurp(baseline_path), tolerance);
    if (report.pass) {
        std::printf("PASS: %zu rows within tolerance %.3g\n", report.rows_compared, tolerance);
        return 0;
    }
    std::printf("FAIL: %zu of %zu rows out of tolerance\n", report.failures.size(),
                report.rows_compared);
    for (const auto& d : report.failures) {
        std::printf("  row %zu (%s): current=%.17g baseline=%.17g %s=%.3g\n", d.index,
                    d.method.c_str(), d.current, d.baseline,
                    d.stochastic ? "|delta|/pooledSE" : "rel_diff", d.measure);
    }
    print_machine_error("GOLDEN_DIFF", std::to_string(report.failures.size()) + " row(s) differ");
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Large-deviation tail approximations for i.i.d. sums and homogeneous processes"};
    app.set_version_flag("--version", ldtail::k_version);
    app.require_subcommand(1);

    CommonOpts rate_opts, tail_opts, sim_opts, series_opts;
    CLI::App* rate = app.add_subcommand("rate", "rate exponent alpha, saddle root, lambda, b0 over a c grid");
    add_common(rate, rate_opts);
    CLI::App* tail = app.add_subcommand("tail", "tail probabilities and theorem approximations");
    add_common(tail, tail_opts);
    CLI::App* simulate = app.add_subcommand("simulate", "importance-sampled tail estimates");
    add_common(simulate, sim_opts);
    CLI::App* series = app.add_subcommand("series", "lambda series coefficients and grid dump");
    add_common(series, series_opts);

    std::string cmp_current, cmp_baseline;
    double cmp_tolerance = 1e-9;
    CLI::App* compare = app.add_subcommand("compare", "diff a result file against a golden baseline");
    compare->add_option("current", cmp_current, "result file to check")->required();
    compare->add_option("baseline", cmp_baseline, "golden baseline file")->required();
    compare->add_option("--tolerance", cmp_tolerance, "relative tolerance for deterministic rows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (compare->parsed()) return run_compare(cmp_current, cmp_baseline, cmp_tolerance);
        if (rate->parsed()) return run_command("rate", rate, rate_opts);
        if (tail->parsed()) return run_command("tail", tail, tail_opts);
        if (simulate->parsed()) return run_command("simulate", simulate, sim_opts);
        if (series->parsed()) return run_command("series", series, series_opts);
    } catch (const ldtail::Error& e) {
        print_machine_error(ldtail::to_string(e.code()), e.what());
        return 2;
    } catch (const std::exception& e) {
        print_machine_error("INTERNAL", e.what());
        return 2;
    }
    return 2;
}
