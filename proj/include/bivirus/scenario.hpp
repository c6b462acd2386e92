#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bivirus/dynamics.hpp"
#include "bivirus/model.hpp"

namespace bivirus {

using Json = nlohmann::json;

/// Scenario file contents, mirroring the JSON schema (1-based node indices).
struct HyperedgeEntry {
    int head = 0;                 ///< node receiving the joint influence
    std::array<int, 2> pair{};    ///< the two interacting nodes (j, l)
    double weight = 0.0;
};

struct VirusConfig {
    std::vector<double> delta;
    double beta_pair = 0.0;
    double beta_hoi = 0.0;
    std::vector<std::vector<double>> a;
    std::vector<HyperedgeEntry> hyperedges;
};

struct SimulationSettings {
    double t_max = 200.0;
    double rtol = 1e-10;
    double atol = 1e-12;
    std::uint64_t rng_seed = 0;
    int census_count = 100;
};

struct ScenarioConfig {
    int n = 0;
    std::array<VirusConfig, 2> viruses;
    std::optional<SimulationSettings> simulation;  ///< absent block keeps defaults
};

/// Parse/validation failure carrying every issue found, not just the first.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

    [[nodiscard]] const std::vector<std::string>& issues() const { return issues_; }

  private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string all = "invalid scenario config:";
        for (const auto& issue : issues) all += "\n  - " + issue;
        return all;
    }
    std::vector<std::string> issues_;
};

namespace detail {

inline std::pair<int, int> line_and_column(const std::string& text, size_t byte) {
    int line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

inline SimulationSettings settings_from_json(const Json& j, std::vector<std::string>& issues) {
    SimulationSettings s;
    if (!j.is_object()) {
        issues.push_back("'simulation' must be an object");
        return s;
    }
    if (j.contains("t_max")) s.t_max = j.at("t_max").get<double>();
    if (j.contains("rtol")) s.rtol = j.at("rtol").get<double>();
    if (j.contains("atol")) s.atol = j.at("atol").get<double>();
    if (j.contains("rng_seed")) s.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    if (j.contains("census_count")) s.census_count = j.at("census_count").get<int>();
    if (!(s.t_max > 0.0)) issues.push_back("simulation.t_max must be positive");
    if (s.census_count < 0) issues.push_back("simulation.census_count must be nonnegative");
    return s;
}

}  // namespace detail

inline Json to_json(const ScenarioConfig& config) {
    Json j;
    j["n"] = config.n;
    j["viruses"] = Json::array();
    for (const VirusConfig& v : config.viruses) {
        Json jv;
        jv["delta"] = v.delta;
        jv["beta_pair"] = v.beta_pair;
        jv["beta_hoi"] = v.beta_hoi;
        jv["a"] = v.a;
        jv["hyperedges"] = Json::array();
        for (const HyperedgeEntry& e : v.hyperedges)
            jv["hyperedges"].push_back({{"head", e.head}, {"pair", {e.pair[0], e.pair[1]}}, {"weight", e.weight}});
        j["viruses"].push_back(std::move(jv));
    }
    if (config.simulation) {
        const SimulationSettings& s = *config.simulation;
        j["simulation"] = {{"t_max", s.t_max},
                           {"rtol", s.rtol},
                           {"atol", s.atol},
                           {"rng_seed", s.rng_seed},
                           {"census_count", s.census_count}};
    }
    return j;
}

inline std::string serialize(const ScenarioConfig& config) { return to_json(config).dump(2) + "\n"; }

/// Dense model assembly; hyperedge (head, [j, l], w) sets b[head](j, l) = w.
inline BivirusModel to_model(const ScenarioConfig& config) {
    const Index n = config.n;
    BivirusModel m;
    for (int k = 0; k < 2; ++k) {
        const VirusConfig& vc = config.viruses[static_cast<size_t>(k)];
        VirusParams& v = m.virus[static_cast<size_t>(k)];
        v.delta = Eigen::Map<const Vector>(vc.delta.data(), static_cast<Index>(vc.delta.size()));
        v.beta_pair = vc.beta_pair;
        v.beta_hoi = vc.beta_hoi;
        v.a = Matrix::Zero(n, n);
        for (Index i = 0; i < n && i < static_cast<Index>(vc.a.size()); ++i)
            for (Index jj = 0; jj < n && jj < static_cast<Index>(vc.a[static_cast<size_t>(i)].size()); ++jj)
                v.a(i, jj) = vc.a[static_cast<size_t>(i)][static_cast<size_t>(jj)];
        v.b.assign(static_cast<size_t>(n), Matrix::Zero(n, n));
        for (const HyperedgeEntry& e : vc.hyperedges)
            v.b[static_cast<size_t>(e.head - 1)](e.pair[0] - 1, e.pair[1] - 1) = e.weight;
    }
    return m;
}

struct LoadedScenario {
    ScenarioConfig config;
    BivirusModel model;
    SimulationSettings settings;  ///< defaults applied when the block is absent
};

/// Parses and fully validates a scenario from JSON text. Parse errors report
/// line/column; structural and model-assumption failures are listed
/// exhaustively, with out-of-range hyperedge indices named entry by entry.
inline LoadedScenario load_config_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        const auto [line, col] = detail::line_and_column(text, e.byte > 0 ? e.byte - 1 : 0);
        std::string what = e.what();
        if (const auto pos = what.find("syntax error"); pos != std::string::npos) what = what.substr(pos);
        throw ConfigError({"parse error at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                           what});
    }

    std::vector<std::string> issues;
    ScenarioConfig config;
    try {
        if (!j.is_object()) throw std::runtime_error("top level must be an object");
        if (!j.contains("n") || !j.at("n").is_number_integer()) throw std::runtime_error("missing integer field 'n'");
        config.n = j.at("n").get<int>();
        if (config.n <= 0) throw std::runtime_error("'n' must be positive");
        if (!j.contains("viruses") || !j.at("viruses").is_array() || j.at("viruses").size() != 2)
            throw std::runtime_error("'viruses' must be an array of exactly 2 entries");

        for (size_t k = 0; k < 2; ++k) {
            const Json& jv = j.at("viruses").at(k);
            VirusConfig& vc = config.viruses[k];
            const std::string where = "viruses[" + std::to_string(k + 1) + "]";
            if (!jv.is_object()) {
                issues.push_back(where + " must be an object");
                continue;
            }
            for (const char* field : {"delta", "beta_pair", "a"})
                if (!jv.contains(field)) issues.push_back(where + " is missing field '" + field + "'");
            if (jv.contains("delta")) vc.delta = jv.at("delta").get<std::vector<double>>();
            vc.beta_pair = jv.value("beta_pair", 0.0);
            vc.beta_hoi = jv.value("beta_hoi", 0.0);
            if (jv.contains("a")) vc.a = jv.at("a").get<std::vector<std::vector<double>>>();

            if (static_cast<int>(vc.delta.size()) != config.n)
                issues.push_back(where + ".delta has length " + std::to_string(vc.delta.size()) + ", expected " +
                                 std::to_string(config.n));
            if (static_cast<int>(vc.a.size()) != config.n)
                issues.push_back(where + ".a has " + std::to_string(vc.a.size()) + " rows, expected " +
                                 std::to_string(config.n));
            for (size_t r = 0; r < vc.a.size(); ++r)
                if (static_cast<int>(vc.a[r].size()) != config.n)
                    issues.push_back(where + ".a row " + std::to_string(r + 1) + " has length " +
                                     std::to_string(vc.a[r].size()) + ", expected " + std::to_string(config.n));

            if (jv.contains("hyperedges")) {
                const Json& edges = jv.at("hyperedges");
                if (!edges.is_array()) {
                    issues.push_back(where + ".hyperedges must be an array");
                } else {
                    for (size_t e = 0; e < edges.size(); ++e) {
                        const Json& je = edges.at(e);
                        const std::string entry = where + ".hyperedges[" + std::to_string(e + 1) + "]";
                        HyperedgeEntry he;
                        if (!je.is_object() || !je.contains("head") || !je.contains("pair")) {
                            issues.push_back(entry + " must be an object with 'head' and 'pair'");
                            continue;
                        }
                        he.head = je.at("head").get<int>();
                        const auto pair = je.at("pair").get<std::vector<int>>();
                        if (pair.size() != 2) {
                            issues.push_back(entry + ".pair must hold exactly 2 indices");
                            continue;
                        }
                        he.pair = {pair[0], pair[1]};
                        he.weight = je.value("weight", 1.0);
                        bool in_range = true;
                        for (const int idx : {he.head, he.pair[0], he.pair[1]})
                            if (idx < 1 || idx > config.n) in_range = false;
                        if (!in_range) {
                            issues.push_back(entry + " index out of range [1," + std::to_string(config.n) +
                                             "]: head=" + std::to_string(he.head) + " pair=[" +
                                             std::to_string(he.pair[0]) + "," + std::to_string(he.pair[1]) + "]");
                            continue;
                        }
                        if (he.weight < 0.0) issues.push_back(entry + " has negative weight");
                        vc.hyperedges.push_back(he);
                    }
                }
            }
        }
        if (j.contains("simulation")) config.simulation = detail::settings_from_json(j.at("simulation"), issues);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        issues.push_back(e.what());
    }
    if (!issues.empty()) throw ConfigError(std::move(issues));

    LoadedScenario out;
    out.config = config;
    out.model = to_model(config);
    for (const ModelViolation& v : validate_model(out.model))
        issues.push_back("virus " + std::to_string(v.virus) + ": " + v.rule + " violated (" + v.detail + ")");
    if (!issues.empty()) throw ConfigError(std::move(issues));
    out.settings = config.simulation.value_or(SimulationSettings{});
    return out;
}

inline LoadedScenario load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot open config file: " + path});
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return load_config_text(buffer.str());
}

// ---------------------------------------------------------------------------
// Built-in scenarios

/// The five-node demonstration network: a directed two-cycle ring with
/// self-loops for pairwise spread (virus 2 using the transpose), and six
/// unit-weight hyperedges per virus. The two builtins differ only in rates:
///  - example1: pairwise 0.2 / higher-order 5 for both viruses (tristable);
///  - example2: pairwise 2 for both, higher-order 3 and 2.4 (unstable
///    disease-free state, two stable boundary equilibria).
/// Rate convention: beta_pair is the pairwise rate, beta_hoi the
/// higher-order rate; these are the only readings consistent with the
/// intended stability outcomes.
inline ScenarioConfig builtin(const std::string& name) {
    if (name != "example1" && name != "example2") throw std::invalid_argument("unknown builtin scenario: " + name);
    const int n = 5;
    ScenarioConfig config;
    config.n = n;

    std::vector<std::vector<double>> a1(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) {
        a1[static_cast<size_t>(i)][static_cast<size_t>(i)] = 1.0;
        a1[static_cast<size_t>(i)][static_cast<size_t>((i + n - 1) % n)] = 1.0;
    }
    std::vector<std::vector<double>> a2(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int jj = 0; jj < n; ++jj) a2[static_cast<size_t>(jj)][static_cast<size_t>(i)] = a1[static_cast<size_t>(i)][static_cast<size_t>(jj)];

    auto edges = [](std::initializer_list<std::array<int, 3>> list) {
        std::vector<HyperedgeEntry> out;
        for (const auto& t : list) out.push_back({t[0], {t[1], t[2]}, 1.0});
        return out;
    };

    for (int k = 0; k < 2; ++k) {
        VirusConfig& vc = config.viruses[static_cast<size_t>(k)];
        vc.delta.assign(n, 1.0);
        vc.a = k == 0 ? a1 : a2;
    }
    config.viruses[0].hyperedges = edges({{1, 2, 3}, {2, 3, 1}, {3, 2, 1}, {1, 4, 5}, {4, 5, 1}, {5, 4, 1}});
    config.viruses[1].hyperedges = edges({{1, 2, 4}, {2, 4, 1}, {4, 2, 1}, {1, 3, 5}, {3, 5, 1}, {5, 3, 1}});

    if (name == "example1") {
        config.viruses[0].beta_pair = 0.2;
        config.viruses[1].beta_pair = 0.2;
        config.viruses[0].beta_hoi = 5.0;
        config.viruses[1].beta_hoi = 5.0;
    } else {
        config.viruses[0].beta_pair = 2.0;
        config.viruses[1].beta_pair = 2.0;
        config.viruses[0].beta_hoi = 3.0;
        config.viruses[1].beta_hoi = 2.4;
    }
    config.simulation = SimulationSettings{};
    return config;
}

// ---------------------------------------------------------------------------
// Trajectory CSV (full double precision)

inline std::string trajectory_csv_header(Index n) {
    std::string header = "t";
    for (Index i = 1; i <= n; ++i) header += ",x1_" + std::to_string(i);
    for (Index i = 1; i <= n; ++i) header += ",x2_" + std::to_string(i);
    return header + "\n";
}

inline std::string format_full(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

inline std::string trajectory_to_csv(const Trajectory& traj) {
    if (traj.states.empty()) return "t\n";
    std::string out = trajectory_csv_header(traj.states.front().nodes());
    for (size_t row = 0; row < traj.times.size(); ++row) {
        out += format_full(traj.times[row]);
        const State& s = traj.states[row];
        for (Index i = 0; i < s.x1.size(); ++i) out += "," + format_full(s.x1(i));
        for (Index i = 0; i < s.x2.size(); ++i) out += "," + format_full(s.x2(i));
        out += "\n";
    }
    return out;
}

}  // namespace bivirus
