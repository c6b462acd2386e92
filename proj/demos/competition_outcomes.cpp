// Minimal library walkthrough: load the tristable built-in scenario, list
// its equilibria, then follow a handful of trajectories to their limits.

#include <cstdio>

#include "bivirus/bivirus.hpp"

int main() {
    using namespace bivirus;

    const ScenarioConfig config = builtin("example1");
    const BivirusModel model = to_model(config);

    const EnumerationResult eq = enumerate_equilibria(model);
    std::printf("equilibria of example1:\n%s\n", equilibria_report_text(eq).c_str());

    for (const State& s0 : sample_initial_conditions(model.nodes(), 5, /*rng_seed=*/42)) {
        const Trajectory traj = integrate(model, s0);
        const ConvergenceVerdict verdict = detect_convergence(model, traj, eq.records);
        std::printf("start " "%s" " -> %s", format_vector(s0.x1, 3).c_str(), to_string(verdict.outcome));
        if (verdict.matched_record >= 0)
            std::printf(" at %s", record_label(eq.records, static_cast<size_t>(verdict.matched_record)).c_str());
        std::printf(" (t = %.3g)\n", traj.times.back());
    }
    return 0;
}
