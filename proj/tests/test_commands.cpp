#include <doctest.h>

#include <cmath>
#include <string>

#include <json.hpp>

#include "ldtail/commands.hpp"
#include "support/oracles.hpp"

using namespace ldtail;
using nlohmann::json;

namespace {

json expo_config() {
    return json{{"distribution", {{"family", "centered_exponential"}, {"rate", 1.0}}}};
}

const ResultRow* find_row(const RunManifest& m, const std::string& method, double x_or_c,
                          double n_or_t = -1.0) {
    for (const auto& r : m.rows) {
        if (r.method == method && r.x_or_c == x_or_c && (n_or_t < 0.0 || r.n_or_t == n_or_t)) {
            return &r;
        }
    }
    return nullptr;
}

}  // namespace

TEST_SUITE_BEGIN("commands");

TEST_CASE("config validation: unknown keys are hard errors with field paths") {
    json cfg = expo_config();
    cfg["c"] = {0.5};
    CHECK_NOTHROW(parse_cli_config(cfg));

    json bad = cfg;
    bad["zzz"] = 1;
    CHECK_THROWS_WITH_AS(parse_cli_config(bad), doctest::Contains("zzz"), Error);

    json bad2 = cfg;
    bad2["distribution"]["p"] = 0.3;  // not a field of centered_exponential
    CHECK_THROWS_AS(parse_cli_config(bad2), Error);

    json bad3 = cfg;
    bad3["output"] = {{"path", "x.csv"}, {"mode", "fast"}};
    CHECK_THROWS_WITH_AS(parse_cli_config(bad3), doctest::Contains("output.mode"), Error);
}

TEST_CASE("config validation: exactly one of distribution/process") {
    json both = expo_config();
    both["process"] = {{"sigma0_sq", 1.0}};
    CHECK_THROWS_AS(parse_cli_config(both), Error);
    CHECK_THROWS_AS(parse_cli_config(json::object()), Error);
}

TEST_CASE("config validation: methods, targets, samples") {
    json cfg = expo_config();
    cfg["c"] = {0.5};
    cfg["methods"] = {"thm6", "warp"};
    CHECK_THROWS_AS(parse_cli_config(cfg), Error);

    json two_targets = expo_config();
    two_targets["c"] = {0.5};
    two_targets["x"] = {2.0};
    CHECK_THROWS_AS(parse_cli_config(two_targets), Error);

    json few = expo_config();
    few["samples"] = 10;
    CHECK_THROWS_AS(parse_cli_config(few), Error);
}

TEST_CASE("grid ranges: linear and log") {
    json cfg = expo_config();
    cfg["c"] = {{"start", 1.0}, {"stop", 3.0}, {"count", 3}};
    const CliConfig parsed = parse_cli_config(cfg);
    REQUIRE(parsed.targets.size() == 3);
    CHECK(parsed.targets[1] == doctest::Approx(2.0).epsilon(1e-15));

    cfg["c"] = {{"start", 1.0}, {"stop", 100.0}, {"count", 3}, {"scale", "log"}};
    const CliConfig logp = parse_cli_config(cfg);
    CHECK(logp.targets[1] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("cmd_rate: exponential alpha column equals c - log(1+c)") {
    json cfg = expo_config();
    cfg["c"] = {0.5, 1.0, 2.0};
    const CmdResult res = cmd_rate(parse_cli_config(cfg));
    CHECK(res.errored_rows == 0);
    CHECK(res.manifest.rows.size() == 12);  // h, alpha, lambda, b0 per c
    for (double c : {0.5, 1.0, 2.0}) {
        const ResultRow* alpha = find_row(res.manifest, "alpha", c);
        REQUIRE(alpha != nullptr);
        CHECK(alpha->value == doctest::Approx(oracles::exp1_alpha(c)).epsilon(1e-12));
        const ResultRow* h = find_row(res.manifest, "h", c);
        REQUIRE(h != nullptr);
        CHECK(h->value == doctest::Approx(c / (1.0 + c)).epsilon(1e-11));
    }
}

TEST_CASE("cmd_rate: gaussian alpha is c^2/2") {
    json cfg = {{"distribution", {{"family", "gaussian"}, {"sigma", 1.0}}},
                {"c", {1.0, 2.0}}};
    const CmdResult res = cmd_rate(parse_cli_config(cfg));
    CHECK(find_row(res.manifest, "alpha", 1.0)->value == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(find_row(res.manifest, "alpha", 2.0)->value == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("cmd_rate: an out-of-range c flags its row and the run continues") {
    json cfg = {{"distribution", {{"family", "centered_bernoulli"}, {"p", 0.3}}},
                {"c", {0.2, 9.0, 0.3}}};
    const CmdResult res = cmd_rate(parse_cli_config(cfg));
    CHECK(res.errored_rows == 1);
    const ResultRow* bad = find_row(res.manifest, "alpha", 9.0);
    REQUIRE(bad != nullptr);
    CHECK(std::isnan(bad->value));
    CHECK(bad->error_note.find("TARGET_OUT_OF_RANGE") != std::string::npos);
    CHECK(find_row(res.manifest, "alpha", 0.2)->value > 0.0);
    CHECK(find_row(res.manifest, "alpha", 0.3)->value > 0.0);
}

TEST_CASE("cmd_tail: bernoulli benchmark rows and ratio to exact") {
    // the event ">= 51 successes of 100" addressed mid-lattice (threshold
    // 20.5): the continuous Theorem-6 value is only ballpark-exact between
    // lattice points, which is the Condition-B caveat the row's note carries
    json cfg = {{"distribution", {{"family", "centered_bernoulli"}, {"p", 0.3}}},
                {"n", 100},
                {"a", 0.205},
                {"methods", {"thm6", "is", "exact"}},
                {"samples", 20000},
                {"seed", 11}};
    const CmdResult res = cmd_tail(parse_cli_config(cfg));
    CHECK(res.errored_rows == 0);
    REQUIRE(res.manifest.rows.size() == 3);
    const ResultRow* thm6 = find_row(res.manifest, "thm6", 0.205);
    REQUIRE(thm6 != nullptr);
    REQUIRE(thm6->exact.has_value());
    REQUIRE(thm6->ratio_to_exact.has_value());
    CHECK(*thm6->ratio_to_exact > 0.8);
    CHECK(*thm6->ratio_to_exact < 1.2);
    CHECK(thm6->error_note.find("Condition B") != std::string::npos);
    const ResultRow* is_row = find_row(res.manifest, "is", 0.205);
    REQUIRE(is_row != nullptr);
    CHECK(is_row->error_note.find("se=") != std::string::npos);
    CHECK(is_row->error_note.find("seed=11") != std::string::npos);

    // on a lattice point the uncorrected formula shows the known lattice bias
    json on_atom = cfg;
    on_atom["a"] = 0.2;
    on_atom["methods"] = {"thm6", "exact"};
    const CmdResult res2 = cmd_tail(parse_cli_config(on_atom));
    const double r = *find_row(res2.manifest, "thm6", 0.2)->ratio_to_exact;
    CHECK(r > 0.5);
    CHECK(r < 2.5);
}

TEST_CASE("cmd_tail: gaussian thm1 ratio is exactly 1") {
    json cfg = {{"distribution", {{"family", "gaussian"}, {"sigma", 1.0}}},
                {"n", 25},
                {"x", 2.0},
                {"methods", {"thm1"}}};
    const CmdResult res = cmd_tail(parse_cli_config(cfg));
    REQUIRE(res.manifest.rows.size() == 1);
    CHECK(res.manifest.rows[0].value == 1.0);
    CHECK_FALSE(res.manifest.rows[0].exact.has_value());  // ratio-form row
}

TEST_CASE("cmd_tail: exponential thm6/exact ratio tightens as n grows") {
    json cfg = expo_config();
    cfg["n"] = {50, 100, 200};
    cfg["c"] = 1.0;
    cfg["methods"] = {"thm6", "exact"};
    const CmdResult res = cmd_tail(parse_cli_config(cfg));
    CHECK(res.errored_rows == 0);
    double prev = 1e9;
    for (double n : {50.0, 100.0, 200.0}) {
        const ResultRow* row = find_row(res.manifest, "thm6", 1.0, n);
        REQUIRE(row != nullptr);
        REQUIRE(row->ratio_to_exact.has_value());
        const double gap = std::abs(*row->ratio_to_exact - 1.0);
        CHECK(gap < prev);
        prev = gap;
    }
}

TEST_CASE("cmd_tail: lower-tail rows via negative targets") {
    json cfg = expo_config();
    cfg["n"] = 100;
    cfg["x"] = {-2.0};
    cfg["methods"] = {"normal", "thm3", "exact"};
    const CmdResult res = cmd_tail(parse_cli_config(cfg));
    CHECK(res.errored_rows == 0);
    const ResultRow* exact = find_row(res.manifest, "exact", -2.0);
    REQUIRE(exact != nullptr);
    // lower tail: P(S <= -2 sigma sqrt(n)), small but not tiny
    CHECK(exact->value > 0.0);
    CHECK(exact->value < 0.05);
    const ResultRow* t3 = find_row(res.manifest, "thm3", -2.0);
    REQUIRE(t3 != nullptr);
    CHECK(*t3->ratio_to_exact > 0.5);
    CHECK(*t3->ratio_to_exact < 1.5);
}

TEST_CASE("cmd_series: gaussian coefficients and grid vanish") {
    json cfg = {{"distribution", {{"family", "gaussian"}, {"sigma", 1.0}}}};
    const CmdResult res = cmd_series(parse_cli_config(cfg));
    CHECK(res.errored_rows == 0);
    for (const auto& r : res.manifest.rows) {
        CHECK(std::abs(r.value) < 1e-12);
    }
}

TEST_CASE("cmd_series: exponential grid matches the closed form") {
    json cfg = expo_config();
    cfg["z"] = {-0.2, -0.1, 0.1, 0.2};
    const CmdResult res = cmd_series(parse_cli_config(cfg));
    CHECK(find_row(res.manifest, "c0", 0.0)->value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(find_row(res.manifest, "c1", 0.0)->value == doctest::Approx(-0.25).epsilon(1e-14));
    for (double z : {-0.2, -0.1, 0.1, 0.2}) {
        CHECK(find_row(res.manifest, "lambda", z)->value ==
              doctest::Approx(oracles::exp1_lambda(z)).epsilon(1e-9));
    }
}

TEST_CASE("cmd_simulate: replication consistency across two seeds") {
    json base = {{"distribution", {{"family", "centered_bernoulli"}, {"p", 0.3}}},
                 {"n", 100},
                 {"a", 0.2},
                 {"samples", 20000}};
    json cfg1 = base;
    cfg1["seed"] = 1;
    json cfg2 = base;
    cfg2["seed"] = 2;
    const CmdResult r1 = cmd_simulate(parse_cli_config(cfg1));
    const CmdResult r2 = cmd_simulate(parse_cli_config(cfg2));
    REQUIRE(r1.manifest.rows.size() == 1);
    const auto se1 = parse_stochastic_se(r1.manifest.rows[0].error_note);
    const auto se2 = parse_stochastic_se(r2.manifest.rows[0].error_note);
    REQUIRE(se1.has_value());
    REQUIRE(se2.has_value());
    const double pooled = std::sqrt(*se1 * *se1 + *se2 * *se2);
    CHECK(std::abs(r1.manifest.rows[0].value - r2.manifest.rows[0].value) < 6.0 * pooled);
}

TEST_CASE("cmd_simulate rejects non-simulation methods") {
    json cfg = {{"distribution", {{"family", "centered_bernoulli"}, {"p", 0.3}}},
                {"n", 100},
                {"a", 0.2},
                {"methods", {"thm6"}}};
    CHECK_THROWS_AS(cmd_simulate(parse_cli_config(cfg)), Error);
}

TEST_CASE("cmd_tail: process spec with exact poisson reference") {
    const double c = 60.5 / 60.0;  // mid-lattice: N > 60.5 <=> N >= 61
    json cfg = {{"process",
                 {{"sigma0_sq", 0.0},
                  {"jump_rate", 1.0},
                  {"jump_law", {{"family", "lattice"}, {"atoms", {{1.0, 1.0}}}}}}},
                {"t", 30.0},
                {"c", c},
                {"methods", {"thm6", "exact", "is"}},
                {"samples", 20000},
                {"seed", 3}};
    const CmdResult res = cmd_tail(parse_cli_config(cfg));
    CHECK(res.errored_rows == 0);
    const ResultRow* thm6 = find_row(res.manifest, "thm6", c);
    REQUIRE(thm6 != nullptr);
    REQUIRE(thm6->ratio_to_exact.has_value());
    // t = 30 and a purely lattice process: O(1/t) plus the lattice gap
    CHECK(*thm6->ratio_to_exact > 0.7);
    CHECK(*thm6->ratio_to_exact < 1.5);
    const ResultRow* is_row = find_row(res.manifest, "is", c);
    REQUIRE(is_row != nullptr);
    const auto se = parse_stochastic_se(is_row->error_note);
    REQUIRE(se.has_value());
    CHECK(std::abs(is_row->value - *is_row->exact) < 4.0 * *se);
}

TEST_CASE("cmd_tail: process rejects sum-only theorem methods per row") {
    json cfg = {{"process", {{"sigma0_sq", 1.0}, {"jump_rate", 0.0}}},
                {"t", 25.0},
                {"c", 1.0},
                {"methods", {"thm1"}}};
    const CmdResult res = cmd_tail(parse_cli_config(cfg));
    CHECK(res.errored_rows == 1);
    CHECK(res.manifest.rows[0].error_note.find("UNSUPPORTED") != std::string::npos);
}

TEST_CASE("manifest header fields are populated") {
    json cfg = expo_config();
    cfg["c"] = {1.0};
    cfg["seed"] = 5;
    const CmdResult res = cmd_rate(parse_cli_config(cfg));
    CHECK(res.manifest.seed == 5);
    CHECK(res.manifest.config_digest.size() == 16);
    CHECK_FALSE(res.manifest.timestamp_utc.empty());
    CHECK(res.manifest.tool_version == std::string(k_version));
}

TEST_SUITE_END();
