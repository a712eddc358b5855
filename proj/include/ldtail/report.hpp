#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ldtail/errors.hpp"
#include "ldtail/version.hpp"

namespace ldtail {

/// One computed result.  `exact` and `ratio_to_exact` are present together:
/// ratio = value / exact in double precision.
struct ResultRow {
    std::string family;
    double n_or_t = 0.0;
    double x_or_c = 0.0;
    std::string method;
    double value = 0.0;
    std::string error_note;
    std::optional<double> exact;
    std::optional<double> ratio_to_exact;
};

struct RunManifest {
    std::string config_digest;
    std::string tool_version = k_version;
    std::uint64_t seed = 0;
    std::string timestamp_utc;
    int schema_version = k_report_schema_version;
    std::vector<ResultRow> rows;
};

namespace detail {

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline constexpr const char* k_csv_header =
    "family,n_or_t,x_or_c,method,value,error_note,exact,ratio_to_exact";

}  // namespace detail

/// FNV-1a content hash of the canonicalized (key-sorted) configuration, so
/// the digest is stable under key reordering.
inline std::string config_digest(const nlohmann::json& config) {
    const std::string canonical = config.dump();  // nlohmann::json orders keys
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// UTC timestamp for run manifests.  Honors SOURCE_DATE_EPOCH so identical
/// configs can produce byte-identical report files.
inline std::string utc_timestamp() {
    std::time_t t;
    if (const char* e = std::getenv("SOURCE_DATE_EPOCH"); e != nullptr) {
        t = static_cast<std::time_t>(std::strtoll(e, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Note text for stochastic rows: the standard error and the seed, so golden
/// comparisons can apply the pooled-SE rule or re-run instead of pinning noise.
inline std::string stochastic_note(double std_error, std::uint64_t seed) {
    return "se=" + detail::format_g17(std_error) + " seed=" + std::to_string(seed);
}

inline std::optional<double> parse_stochastic_se(const std::string& note) {
    const auto pos = note.find("se=");
    if (pos == std::string::npos) return std::nullopt;
    return std::strtod(note.c_str() + pos + 3, nullptr);
}

inline std::string emit_csv(const RunManifest& m) {
    if (m.rows.empty()) raise(errc::empty_result, "manifest has no rows");
    std::string out = detail::k_csv_header;
    out += '\n';
    for (const auto& r : m.rows) {
        out += detail::csv_escape(r.family);
        out += ',';
        out += detail::format_g17(r.n_or_t);
        out += ',';
        out += detail::format_g17(r.x_or_c);
        out += ',';
        out += detail::csv_escape(r.method);
        out += ',';
        out += detail::format_g17(r.value);
        out += ',';
        out += detail::csv_escape(r.error_note);
        out += ',';
        if (r.exact) out += detail::format_g17(*r.exact);
        out += ',';
        if (r.ratio_to_exact) out += detail::format_g17(*r.ratio_to_exact);
        out += '\n';
    }
    return out;
}

inline std::string emit_json(const RunManifest& m) {
    if (m.rows.empty()) raise(errc::empty_result, "manifest has no rows");
    nlohmann::json j;
    j["header"] = {
        {"schema_version", m.schema_version},
        {"tool_version", m.tool_version},
        {"config_digest", m.config_digest},
        {"seed", m.seed},
        {"timestamp_utc", m.timestamp_utc},
    };
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : m.rows) {
        nlohmann::json row = {
            {"family", r.family},       {"n_or_t", r.n_or_t},
            {"x_or_c", r.x_or_c},       {"method", r.method},
            {"value", r.value},         {"error_note", r.error_note},
        };
        if (r.exact) row["exact"] = *r.exact;
        if (r.ratio_to_exact) row["ratio_to_exact"] = *r.ratio_to_exact;
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline RunManifest parse_csv_manifest(const std::string& bytes) {
    RunManifest m;
    std::size_t pos = 0;
    bool first = true;
    while (pos < bytes.size()) {
        std::size_t nl = bytes.find('\n', pos);
        if (nl == std::string::npos) nl = bytes.size();
        const std::string line = bytes.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty()) continue;
        if (first) {
            if (line != k_csv_header) {
                raise(errc::schema_mismatch, "unexpected CSV header: " + line);
            }
            first = false;
            continue;
        }
        const auto f = split_csv_line(line);
        if (f.size() != 8) raise(errc::schema_mismatch, "CSV row with wrong field count");
        ResultRow r;
        r.family = f[0];
        r.n_or_t = std::strtod(f[1].c_str(), nullptr);
        r.x_or_c = std::strtod(f[2].c_str(), nullptr);
        r.method = f[3];
        r.value = std::strtod(f[4].c_str(), nullptr);
        r.error_note = f[5];
        if (!f[6].empty()) r.exact = std::strtod(f[6].c_str(), nullptr);
        if (!f[7].empty()) r.ratio_to_exact = std::strtod(f[7].c_str(), nullptr);
        m.rows.push_back(std::move(r));
    }
    if (first) raise(errc::schema_mismatch, "empty CSV input");
    return m;
}

inline RunManifest parse_json_manifest(const std::string& bytes) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception& e) {
        raise(errc::schema_mismatch, std::string("bad JSON manifest: ") + e.what());
    }
    if (!j.contains("header") || !j.contains("rows")) {
        raise(errc::schema_mismatch, "JSON manifest missing header/rows");
    }
    RunManifest m;
    const auto& h = j["header"];
    m.schema_version = h.value("schema_version", 0);
    if (m.schema_version != k_report_schema_version) {
        raise(errc::schema_mismatch,
              "schema_version " + std::to_string(m.schema_version) + " unsupported");
    }
    m.tool_version = h.value("tool_version", "");
    m.config_digest = h.value("config_digest", "");
    m.seed = h.value("seed", std::uint64_t{0});
    m.timestamp_utc = h.value("timestamp_utc", "");
    for (const auto& row : j["rows"]) {
        ResultRow r;
        r.family = row.value("family", "");
        r.n_or_t = row.value("n_or_t", 0.0);
        r.x_or_c = row.value("x_or_c", 0.0);
        r.method = row.value("method", "");
        r.value = row.value("value", 0.0);
        r.error_note = row.value("error_note", "");
        if (row.contains("exact")) r.exact = row["exact"].get<double>();
        if (row.contains("ratio_to_exact")) r.ratio_to_exact = row["ratio_to_exact"].get<double>();
        m.rows.push_back(std::move(r));
    }
    return m;
}

}  // namespace detail

/// Parse an emitted manifest; the leading byte distinguishes JSON from CSV.
inline RunManifest parse_manifest(const std::string& bytes) {
    for (char c : bytes) {
        if (c == ' ' || c == '\n' || c == '\t' || c == '\r') continue;
        if (c == '{') return detail::parse_json_manifest(bytes);
        break;
    }
    return detail::parse_csv_manifest(bytes);
}

struct RowDiff {
    std::size_t index = 0;
    std::string method;
    double current = 0.0;
    double baseline = 0.0;
    double measure = 0.0;  // relative diff, or |delta|/pooled SE for stochastic rows
    bool stochastic = false;
    bool pass = true;
};

struct DiffReport {
    bool pass = true;
    std::vector<RowDiff> failures;
    std::size_t rows_compared = 0;
};

/// Golden comparison: deterministic rows by relative difference against
/// rel_tol, stochastic (mc/is) rows by 5x the pooled standard error.
inline DiffReport compare_golden(const RunManifest& current, const std::string& baseline_bytes,
                                 double rel_tol) {
    const RunManifest baseline = parse_manifest(baseline_bytes);
    if (baseline.rows.size() != current.rows.size()) {
        raise(errc::schema_mismatch,
              "row count mismatch: " + std::to_string(current.rows.size()) + " vs baseline " +
                  std::to_string(baseline.rows.size()));
    }
    DiffReport report;
    report.rows_compared = current.rows.size();
    for (std::size_t i = 0; i < current.rows.size(); ++i) {
        const ResultRow& a = current.rows[i];
        const ResultRow& b = baseline.rows[i];
        if (a.method != b.method) {
            raise(errc::schema_mismatch, "row " + std::to_string(i) + " method mismatch");
        }
        RowDiff d;
        d.index = i;
        d.method = a.method;
        d.current = a.value;
        d.baseline = b.value;
        if (std::isnan(a.value) && std::isnan(b.value)) continue;  // both rows errored
        const bool stochastic = a.method == "mc" || a.method == "is";
        if (stochastic) {
            const auto se_a = parse_stochastic_se(a.error_note);
            const auto se_b = parse_stochastic_se(b.error_note);
            if (se_a && se_b) {
                const double pooled = std::sqrt(*se_a * *se_a + *se_b * *se_b);
                d.stochastic = true;
                d.measure = pooled > 0.0 ? std::abs(a.value - b.value) / pooled
                                         : (a.value == b.value ? 0.0 : HUGE_VAL);
                d.pass = d.measure <= 5.0;
                if (!d.pass) {
                    report.pass = false;
                    report.failures.push_back(d);
                }
                continue;
            }
        }
        d.measure = std::abs(a.value - b.value) / std::max(std::abs(b.value), 1e-300);
        d.pass = d.measure <= rel_tol;
        if (std::isnan(a.value) != std::isnan(b.value)) d.pass = false;
        if (!d.pass) {
            report.pass = false;
            report.failures.push_back(d);
        }
    }
    return report;
}

}  // namespace ldtail
