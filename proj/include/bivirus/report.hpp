#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bivirus/dynamics.hpp"
#include "bivirus/equilibria.hpp"
#include "bivirus/scenario.hpp"

namespace bivirus {

// JSON report builders; the shipped schemas under schemas/ describe these
// layouts and the test suite validates the outputs against them.

inline Json to_json(const State& s) {
    Json j;
    j["x1"] = std::vector<double>(s.x1.data(), s.x1.data() + s.x1.size());
    j["x2"] = std::vector<double>(s.x2.data(), s.x2.data() + s.x2.size());
    return j;
}

inline Json to_json(const EquilibriumRecord& rec) {
    Json j;
    j["kind"] = to_string(rec.kind);
    j["point"] = to_json(rec.point);
    j["residual"] = rec.residual;
    j["s_jacobian"] = rec.s_jacobian;
    j["stability"] = to_string(rec.stability);
    j["saturated"] = rec.saturated;
    j["nondegenerate"] = rec.nondegenerate;
    j["det_scaled"] = rec.det_scaled;
    return j;
}

inline Json equilibria_report_json(const EnumerationResult& result) {
    Json j;
    j["records"] = Json::array();
    for (const EquilibriumRecord& rec : result.records) j["records"].push_back(to_json(rec));
    j["warnings"] = result.warnings;
    j["budget_exhausted"] = result.budget_exhausted;
    return j;
}

inline Json to_json(const ConditionReport& rep) {
    Json j;
    j["name"] = rep.name;
    j["overall"] = to_string(rep.overall);
    j["claim"] = rep.claim;
    j["findings"] = Json::array();
    for (const ConditionReport::Finding& f : rep.findings) {
        Json jf;
        jf["name"] = f.name;
        jf["verdict"] = to_string(f.verdict);
        jf["evidence"] = Json::object();
        for (const auto& [key, value] : f.evidence) jf["evidence"][key] = value;
        j["findings"].push_back(std::move(jf));
    }
    return j;
}

inline Json conditions_report_json(const std::vector<ConditionReport>& reports) {
    Json j;
    j["checks"] = Json::array();
    for (const ConditionReport& rep : reports) j["checks"].push_back(to_json(rep));
    return j;
}

inline Json census_report_json(const CensusSummary& summary) {
    Json j;
    j["count"] = summary.count;
    j["converged"] = summary.converged;
    j["converged_fraction"] = summary.converged_fraction();
    j["histogram"] = Json::array();
    for (const auto& [label, count] : summary.histogram) j["histogram"].push_back({{"label", label}, {"count", count}});
    j["records"] = Json::array();
    for (size_t r = 0; r < summary.records.size(); ++r) {
        Json jr = to_json(summary.records[r]);
        jr["label"] = record_label(summary.records, r);
        j["records"].push_back(std::move(jr));
    }
    j["runs"] = Json::array();
    for (const CensusRun& run : summary.runs) {
        Json jr;
        jr["run_id"] = run.run_id;
        jr["stream_seed"] = run.stream_seed;
        jr["outcome"] = to_string(run.outcome);
        jr["matched_record"] = run.matched_record;
        jr["matched_label"] =
            run.matched_record >= 0 ? record_label(summary.records, static_cast<size_t>(run.matched_record)) : "";
        jr["terminal_distance"] = run.terminal_distance;
        jr["t_end"] = run.t_end;
        jr["max_domain_excursion"] = run.max_domain_excursion;
        j["runs"].push_back(std::move(jr));
    }
    return j;
}

// ---------------------------------------------------------------------------
// Plain-text renderers for the CLI

inline std::string format_vector(const Vector& v, int precision = 6) {
    std::string out = "[";
    char buf[32];
    for (Index i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, v(i));
        out += buf;
        if (i + 1 < v.size()) out += ", ";
    }
    return out + "]";
}

inline std::string equilibria_report_text(const EnumerationResult& result) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-12s %-30s %-9s %-10s %-10s %-6s %-6s\n", "kind", "stability", "s(J)",
                  "residual", "|det|", "sat", "nondeg");
    out += buf;
    for (const EquilibriumRecord& rec : result.records) {
        std::snprintf(buf, sizeof buf, "%-12s %-30s %-9.2e %-10.2e %-10.2e %-6s %-6s\n", to_string(rec.kind),
                      to_string(rec.stability), rec.s_jacobian, rec.residual, rec.det_scaled,
                      rec.saturated ? "yes" : "no", rec.nondegenerate ? "yes" : "no");
        out += buf;
        out += "    x1 = " + format_vector(rec.point.x1) + "\n";
        out += "    x2 = " + format_vector(rec.point.x2) + "\n";
    }
    for (const std::string& w : result.warnings) out += "warning: " + w + "\n";
    return out;
}

inline std::string conditions_report_text(const std::vector<ConditionReport>& reports) {
    std::string out;
    char buf[64];
    for (const ConditionReport& rep : reports) {
        out += rep.name + ": " + to_string(rep.overall) + "\n";
        if (!rep.claim.empty()) out += "  claim: " + rep.claim + "\n";
        for (const ConditionReport::Finding& f : rep.findings) {
            out += "  " + f.name + ": " + to_string(f.verdict);
            if (!f.evidence.empty()) {
                out += " (";
                for (size_t i = 0; i < f.evidence.size(); ++i) {
                    std::snprintf(buf, sizeof buf, "%s=%.10g", f.evidence[i].first.c_str(), f.evidence[i].second);
                    out += buf;
                    if (i + 1 < f.evidence.size()) out += ", ";
                }
                out += ")";
            }
            out += "\n";
        }
    }
    return out;
}

inline std::string census_report_text(const CensusSummary& summary) {
    std::string out;
    char buf[96];
    std::snprintf(buf, sizeof buf, "census: %d runs, %d converged (%.1f%%)\n", summary.count, summary.converged,
                  100.0 * summary.converged_fraction());
    out += buf;
    for (const auto& [label, count] : summary.histogram) {
        std::snprintf(buf, sizeof buf, "  %-16s %d\n", label.c_str(), count);
        out += buf;
    }
    for (const CensusRun& run : summary.runs) {
        if (run.outcome == ConvergenceVerdict::Outcome::converged && run.matched_record >= 0) continue;
        std::snprintf(buf, sizeof buf, "  run %d: %s (t_end = %.6g)\n", run.run_id, to_string(run.outcome),
                      run.t_end);
        out += buf;
    }
    return out;
}

/// Per-run census CSV: run_id, stream seed, verdict, matched kind, distance.
inline std::string census_runs_csv(const CensusSummary& summary) {
    std::string out = "run_id,seed,verdict,matched_kind,terminal_distance\n";
    for (const CensusRun& run : summary.runs) {
        out += std::to_string(run.run_id) + "," + std::to_string(run.stream_seed) + "," + to_string(run.outcome) + ",";
        out += run.matched_record >= 0 ? record_label(summary.records, static_cast<size_t>(run.matched_record)) : "";
        out += "," + format_full(run.terminal_distance) + "\n";
    }
    return out;
}

}  // namespace bivirus
