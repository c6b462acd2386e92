// Command-line front end: scenario ingestion, simulation, equilibrium
// enumeration, condition reports and convergence censuses.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bivirus/bivirus.hpp"

namespace {

using namespace bivirus;

struct CommonArgs {
    std::string config_path;
    std::string builtin_name;
    bool json = false;
    std::string out_path;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "scenario config file (JSON)");
    cmd->add_option("--builtin", args.builtin_name, "built-in scenario name (example1 | example2)");
    cmd->add_flag("--json", args.json, "emit the report as JSON");
    cmd->add_option("--out", args.out_path, "write the primary output to this path");
}

LoadedScenario resolve_scenario(const CommonArgs& args) {
    if (!args.config_path.empty() && !args.builtin_name.empty())
        throw ConfigError({"give either --config or --builtin, not both"});
    if (!args.config_path.empty()) return load_config_file(args.config_path);
    if (!args.builtin_name.empty()) {
        const ScenarioConfig config = builtin(args.builtin_name);
        return LoadedScenario{config, to_model(config), *config.simulation};
    }
    throw ConfigError({"a scenario is required: pass --config PATH or --builtin NAME"});
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

/// Primary output goes to --out when given, else to stdout; the secondary
/// report then goes to stdout or stderr respectively.
void emit(const CommonArgs& args, const std::string& primary, const std::optional<std::string>& report = {}) {
    if (!args.out_path.empty()) {
        write_file(args.out_path, primary);
        if (report) std::cout << *report;
    } else {
        std::cout << primary;
        if (report) std::cerr << *report;
    }
}

IntegratorOptions integrator_options(const SimulationSettings& settings) {
    IntegratorOptions opts;
    opts.rtol = settings.rtol;
    opts.atol = settings.atol;
    opts.t_max = settings.t_max;
    return opts;
}

std::string match_label(const std::vector<EquilibriumRecord>& records, const ConvergenceVerdict& verdict) {
    if (verdict.matched_record < 0) return "(no known equilibrium within 1e-5)";
    return record_label(records, static_cast<size_t>(verdict.matched_record));
}

int run_simulate(const CommonArgs& args, const std::string& init_mode, double eps, const std::string& x0_csv,
                 std::optional<std::uint64_t> seed, std::optional<double> t_max) {
    const LoadedScenario scenario = resolve_scenario(args);
    const Index n = scenario.model.nodes();

    State s0{Vector::Zero(n), Vector::Zero(n)};
    const std::uint64_t rng_seed = seed.value_or(scenario.settings.rng_seed);
    if (init_mode == "random") {
        s0 = sample_initial_conditions(n, 1, rng_seed).front();
    } else if (init_mode == "near-dfe") {
        s0 = State{Vector::Constant(n, eps), Vector::Constant(n, eps)};
    } else if (init_mode == "explicit") {
        std::vector<double> values;
        std::stringstream ss(x0_csv);
        std::string token;
        while (std::getline(ss, token, ',')) values.push_back(std::stod(token));
        if (static_cast<Index>(values.size()) != 2 * n)
            throw std::runtime_error("--x0 must list exactly 2n = " + std::to_string(2 * n) + " values");
        s0 = unstack(n, Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size())));
        if (!in_domain(s0, 0.0)) throw std::runtime_error("--x0 lies outside the domain {x>=0, x1+x2<=1}");
    } else {
        throw std::runtime_error("unknown --init mode: " + init_mode);
    }

    IntegratorOptions opts = integrator_options(scenario.settings);
    if (t_max) opts.t_max = *t_max;

    const Trajectory traj = integrate(scenario.model, s0, opts);
    const auto records = enumerate_equilibria(scenario.model).records;
    const ConvergenceVerdict verdict = detect_convergence(scenario.model, traj, records, opts.eps_field,
                                                          opts.convergence_window);

    std::string report;
    if (args.json) {
        Json j;
        j["verdict"] = to_string(traj.verdict);
        j["outcome"] = to_string(verdict.outcome);
        j["t_end"] = traj.times.back();
        j["steps_accepted"] = traj.steps_accepted;
        j["steps_rejected"] = traj.steps_rejected;
        j["max_domain_excursion"] = traj.max_domain_excursion;
        j["matched"] = verdict.matched_record >= 0;
        j["matched_label"] = verdict.matched_record >= 0 ? match_label(records, verdict) : "";
        j["matched_distance"] = verdict.matched_distance;
        if (!traj.error.empty()) j["error"] = traj.error;
        report = j.dump(2) + "\n";
    } else {
        char buf[256];
        std::snprintf(buf, sizeof buf, "verdict: %s after t = %.6g (%ld accepted / %ld rejected steps)\n",
                      to_string(traj.verdict), traj.times.back(), traj.steps_accepted, traj.steps_rejected);
        report = buf;
        if (verdict.outcome == ConvergenceVerdict::Outcome::converged)
            report += "converged: " + match_label(records, verdict) + "\n";
        else
            report += std::string("converged: no (") + to_string(verdict.outcome) + ")\n";
        if (!traj.error.empty()) report += "error: " + traj.error + "\n";
    }
    emit(args, trajectory_to_csv(traj), report);

    const bool failed = traj.verdict == TerminalVerdict::left_domain || traj.verdict == TerminalVerdict::step_underflow;
    return failed ? 1 : 0;
}

int run_equilibria(const CommonArgs& args) {
    const LoadedScenario scenario = resolve_scenario(args);
    const EnumerationResult result = enumerate_equilibria(scenario.model);
    emit(args, args.json ? equilibria_report_json(result).dump(2) + "\n" : equilibria_report_text(result));
    return 0;
}

std::vector<ConditionReport> build_condition_reports(const BivirusModel& model,
                                                     const std::vector<EquilibriumRecord>& records) {
    std::vector<ConditionReport> reports;
    reports.push_back(check_dfe_local(model));
    reports.push_back(check_dfe_global(model));
    reports.push_back(check_tristability(model));

    const Vector* bx1 = nullptr;
    const Vector* bx2 = nullptr;
    for (const EquilibriumRecord& rec : records) {
        if (rec.kind == EquilibriumKind::boundary_v1 && !bx1) bx1 = &rec.point.x1;
        if (rec.kind == EquilibriumKind::boundary_v2 && !bx2) bx2 = &rec.point.x2;
    }
    if (bx1 && bx2) {
        reports.push_back(check_boundary_instability(model, *bx1, *bx2));
    } else {
        ConditionReport rep;
        rep.name = "boundary_instability";
        rep.overall = ConditionReport::Verdict::not_applicable;
        rep.claim = "requires one boundary equilibrium per virus";
        reports.push_back(std::move(rep));
    }
    reports.push_back(check_coexistence_hypotheses(model, records));
    return reports;
}

int run_conditions(const CommonArgs& args) {
    const LoadedScenario scenario = resolve_scenario(args);
    const EnumerationResult result = enumerate_equilibria(scenario.model);
    const auto reports = build_condition_reports(scenario.model, result.records);
    emit(args, args.json ? conditions_report_json(reports).dump(2) + "\n" : conditions_report_text(reports));
    return 0;
}

int run_census(const CommonArgs& args, std::optional<int> count, std::optional<std::uint64_t> seed,
               std::optional<double> t_max) {
    const LoadedScenario scenario = resolve_scenario(args);
    const IntegratorOptions opts = integrator_options(scenario.settings);
    const CensusSummary summary =
        convergence_census(scenario.model, count.value_or(scenario.settings.census_count),
                           seed.value_or(scenario.settings.rng_seed), t_max.value_or(scenario.settings.t_max), opts);
    const std::string report = args.json ? census_report_json(summary).dump(2) + "\n" : census_report_text(summary);
    emit(args, census_runs_csv(summary), report);
    return 0;
}

int run_builtin(const CommonArgs& args) {
    if (args.builtin_name.empty()) throw ConfigError({"builtin: pass --builtin NAME (example1 | example2)"});
    emit(args, serialize(builtin(args.builtin_name)));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"competitive two-virus SIS dynamics over hypergraphs"};
    app.require_subcommand(1);

    CommonArgs sim_args, eq_args, cond_args, census_args, builtin_args;
    std::string init_mode = "random";
    double eps = 1e-3;
    std::string x0_csv;
    std::optional<std::uint64_t> seed;
    std::optional<double> t_max;
    std::optional<int> count;

    CLI::App* simulate = app.add_subcommand("simulate", "integrate one trajectory, emit CSV and a terminal report");
    add_common(simulate, sim_args);
    simulate->add_option("--init", init_mode, "initial condition: random | near-dfe | explicit")
        ->check(CLI::IsMember({"random", "near-dfe", "explicit"}));
    simulate->add_option("--eps", eps, "infection level per node for --init near-dfe");
    simulate->add_option("--x0", x0_csv, "comma-separated 2n values for --init explicit");
    simulate->add_option("--seed", seed, "RNG seed for --init random");
    simulate->add_option("--t-max", t_max, "integration horizon");

    CLI::App* equilibria = app.add_subcommand("equilibria", "enumerate and classify all equilibria");
    add_common(equilibria, eq_args);

    CLI::App* conditions = app.add_subcommand("conditions", "evaluate the stability/existence condition checkers");
    add_common(conditions, cond_args);

    CLI::App* census = app.add_subcommand("census", "convergence census over random initial conditions");
    add_common(census, census_args);
    census->add_option("--count", count, "number of trajectories");
    census->add_option("--seed", seed, "RNG seed");
    census->add_option("--t-max", t_max, "integration horizon per trajectory");

    CLI::App* builtin_cmd = app.add_subcommand("builtin", "print a built-in scenario config");
    add_common(builtin_cmd, builtin_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return run_simulate(sim_args, init_mode, eps, x0_csv, seed, t_max);
        if (equilibria->parsed()) return run_equilibria(eq_args);
        if (conditions->parsed()) return run_conditions(cond_args);
        if (census->parsed()) return run_census(census_args, count, seed, t_max);
        if (builtin_cmd->parsed()) return run_builtin(builtin_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
