#include <catch2/catch.hpp>

#include "bivirus/report.hpp"
#include "bivirus/scenario.hpp"
#include "oracles.hpp"
#include "schema_check.hpp"

using namespace bivirus;

namespace {

std::string schema_path(const char* name) { return std::string(BIVIRUS_SCHEMA_DIR) + "/" + name; }

void require_valid(const Json& value, const char* schema) {
    const auto errors = schema_check::validate_against_file(value, schema_path(schema));
    for (const auto& e : errors) UNSCOPED_INFO(e);
    REQUIRE(errors.empty());
}

}  // namespace

TEST_CASE("built-in scenarios match the hand-coded model", "[scenario][builtin]") {
    for (const char* name : {"example1", "example2"}) {
        const ScenarioConfig config = builtin(name);
        const BivirusModel got = to_model(config);
        const BivirusModel want =
            std::string(name) == "example1" ? oracles::example1_model() : oracles::example2_model();
        for (int k = 0; k < 2; ++k) {
            REQUIRE(got.virus[static_cast<size_t>(k)].a == want.virus[static_cast<size_t>(k)].a);
            REQUIRE(got.virus[static_cast<size_t>(k)].delta == want.virus[static_cast<size_t>(k)].delta);
            REQUIRE(got.virus[static_cast<size_t>(k)].beta_pair == want.virus[static_cast<size_t>(k)].beta_pair);
            REQUIRE(got.virus[static_cast<size_t>(k)].beta_hoi == want.virus[static_cast<size_t>(k)].beta_hoi);
            for (size_t i = 0; i < 5; ++i)
                REQUIRE(got.virus[static_cast<size_t>(k)].b[i] == want.virus[static_cast<size_t>(k)].b[i]);
        }
        REQUIRE(config.viruses[0].hyperedges.size() == 6);
        REQUIRE(config.viruses[1].hyperedges.size() == 6);
        REQUIRE(validate_model(got).empty());
    }
    REQUIRE_THROWS_AS(builtin("example3"), std::invalid_argument);
}

TEST_CASE("built-in scenarios land in their intended regimes", "[scenario][builtin]") {
    REQUIRE(check_tristability(to_model(builtin("example1"))).passed());
    REQUIRE_FALSE(check_dfe_local(to_model(builtin("example2"))).passed());
}

TEST_CASE("serialize/load round trip is the identity", "[scenario][roundtrip]") {
    for (const char* name : {"example1", "example2"}) {
        const ScenarioConfig config = builtin(name);
        const LoadedScenario loaded = load_config_text(serialize(config));
        REQUIRE(to_json(loaded.config) == to_json(config));
        REQUIRE(loaded.settings.t_max == config.simulation->t_max);
        REQUIRE(loaded.settings.census_count == config.simulation->census_count);
    }
}

TEST_CASE("configs validate against the shipped schema", "[scenario][schema]") {
    require_valid(to_json(builtin("example1")), "scenario_config.schema.json");
    require_valid(to_json(builtin("example2")), "scenario_config.schema.json");
}

TEST_CASE("missing simulation block applies the documented defaults", "[scenario]") {
    ScenarioConfig config = builtin("example1");
    config.simulation.reset();
    const std::string text = serialize(config);
    REQUIRE(text.find("simulation") == std::string::npos);
    const LoadedScenario loaded = load_config_text(text);
    REQUIRE(loaded.settings.t_max == 200.0);
    REQUIRE(loaded.settings.rtol == 1e-10);
    REQUIRE(loaded.settings.atol == 1e-12);
    REQUIRE(loaded.settings.rng_seed == 0);
    REQUIRE(loaded.settings.census_count == 100);
}

TEST_CASE("parse errors carry line and column", "[scenario][errors]") {
    const std::string broken = "{\n  \"n\": 5,\n  \"viruses\": [}\n";
    try {
        load_config_text(broken);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.issues().size() == 1);
        REQUIRE(e.issues()[0].find("line 3") != std::string::npos);
        REQUIRE(e.issues()[0].find("column") != std::string::npos);
    }
}

TEST_CASE("out-of-range hyperedge indices are named entry by entry", "[scenario][errors]") {
    ScenarioConfig config = builtin("example1");
    config.viruses[0].hyperedges[2].head = 6;
    config.viruses[1].hyperedges[4].pair[1] = 9;
    try {
        load_config_text(serialize(config));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.issues().size() == 2);
        REQUIRE(e.issues()[0].find("viruses[1].hyperedges[3]") != std::string::npos);
        REQUIRE(e.issues()[0].find("head=6") != std::string::npos);
        REQUIRE(e.issues()[1].find("viruses[2].hyperedges[5]") != std::string::npos);
    }
}

TEST_CASE("model-assumption failures are listed exhaustively", "[scenario][errors]") {
    ScenarioConfig config = builtin("example1");
    config.viruses[0].delta[1] = 0.0;
    config.viruses[1].delta[3] = -1.0;
    try {
        load_config_text(serialize(config));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        REQUIRE(e.issues().size() == 2);
        REQUIRE(e.issues()[0].find("virus 1") != std::string::npos);
        REQUIRE(e.issues()[0].find("positive_healing_rate") != std::string::npos);
        REQUIRE(e.issues()[1].find("virus 2") != std::string::npos);
    }
}

TEST_CASE("empty hyperedge list is a valid pairwise-only model", "[scenario]") {
    ScenarioConfig config = builtin("example1");
    config.viruses[0].hyperedges.clear();
    config.viruses[1].hyperedges.clear();
    const LoadedScenario loaded = load_config_text(serialize(config));
    for (const auto& bi : loaded.model.virus[0].b) REQUIRE(bi.isZero(0.0));
    REQUIRE(hoi_support(loaded.model.virus[0]).isZero(0.0));
}

TEST_CASE("trajectory CSV uses full precision and re-parses into the domain", "[scenario][csv]") {
    REQUIRE(format_full(1.0 / 3.0) == "0.33333333333333331");

    const auto m = oracles::example1_model();
    IntegratorOptions opts;
    opts.t_max = 5.0;
    const Trajectory traj = integrate(m, State{Vector::Constant(5, 0.3), Vector::Constant(5, 0.2)}, opts);
    const std::string csv = trajectory_to_csv(traj);

    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    REQUIRE(line == "t,x1_1,x1_2,x1_3,x1_4,x1_5,x2_1,x2_2,x2_3,x2_4,x2_5");

    size_t row = 0;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string field;
        std::vector<double> values;
        while (std::getline(fields, field, ',')) values.push_back(std::stod(field));
        REQUIRE(values.size() == 11);
        State s{Eigen::Map<const Vector>(values.data() + 1, 5), Eigen::Map<const Vector>(values.data() + 6, 5)};
        REQUIRE(in_domain(s, 1e-7));
        // %.17g round-trips doubles exactly
        REQUIRE(values[0] == traj.times[row]);
        REQUIRE(s.x1 == traj.states[row].x1);
        ++row;
    }
    REQUIRE(row == traj.states.size());
}

TEST_CASE("JSON reports validate against the shipped schemas", "[scenario][schema]") {
    const auto m = oracles::example2_model();
    const EnumerationResult result = enumerate_equilibria(m);

    require_valid(equilibria_report_json(result), "equilibria_report.schema.json");

    std::vector<ConditionReport> checks{check_dfe_local(m), check_dfe_global(m), check_tristability(m),
                                        check_coexistence_hypotheses(m, result.records)};
    require_valid(conditions_report_json(checks), "conditions_report.schema.json");

    const CensusSummary summary = convergence_census(m, 6, 2, 200.0);
    require_valid(census_report_json(summary), "census_report.schema.json");
}
