#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bivirus/equilibria.hpp"
#include "bivirus/model.hpp"
#include "bivirus/rng.hpp"

namespace bivirus {

struct IntegratorOptions {
    // Explicit RK error control leaves a state-error plateau of roughly
    // tolerance size near an attracting equilibrium, and the convergence
    // test needs the field norm (|J| times that plateau) to drop below
    // eps_field. The defaults keep two orders of headroom.
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 1e-3;
    double t_max = 200.0;
    double eps_field = 1e-8;        ///< field norm threshold for convergence
    int convergence_window = 10;    ///< consecutive accepted steps below it
    bool stop_on_convergence = true;
    double guard_clamp = 1e-9;      ///< clamp/rescale excursions up to here
    double guard_abort = 1e-7;      ///< abort beyond here
    long max_steps = 20'000'000;
};

enum class TerminalVerdict { converged_to, max_time_reached, left_domain, step_underflow };

inline const char* to_string(TerminalVerdict v) {
    switch (v) {
        case TerminalVerdict::converged_to: return "converged_to";
        case TerminalVerdict::max_time_reached: return "max_time_reached";
        case TerminalVerdict::left_domain: return "left_domain";
        case TerminalVerdict::step_underflow: return "step_underflow";
    }
    return "?";
}

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    long steps_accepted = 0;
    long steps_rejected = 0;
    TerminalVerdict verdict = TerminalVerdict::max_time_reached;
    std::optional<State> limit;          ///< set when verdict is converged_to
    std::string error;                   ///< set for the two failure verdicts
    double max_domain_excursion = 0.0;   ///< worst pre-guard violation seen
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double kDpC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double kDpA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
inline constexpr double kDpB5[7] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0};
inline constexpr double kDpB4[7] = {5179.0 / 57600,    0.0,         7571.0 / 16695, 393.0 / 640,
                                    -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

struct DriveStats {
    long steps_accepted = 0;
    long steps_rejected = 0;
    double max_excursion = 0.0;
    std::string error;
};

/// Adaptive embedded RK 4(5) drive from t0 to t1 with the domain guard
/// applied after every accepted step. on_accept(t, state, field_norm) runs
/// per accepted step; convergence streaks stop the drive early only when
/// requested. The state is advanced in place.
template <class OnAccept>
inline TerminalVerdict rk45_drive(const BivirusModel& m, State& s, double t0, double t1,
                                  const IntegratorOptions& opts, DriveStats& stats, OnAccept&& on_accept) {
    const Index n = m.nodes();
    Vector y = stack(s);
    auto field = [&m, n](const Vector& z) { return stack(vector_field(m, unstack(n, z))); };

    double t = t0;
    double h = std::min(opts.initial_step, t1 - t0);
    Vector k[7];
    k[0] = field(y);
    int streak = 0;
    long step_count = 0;

    while (t < t1) {
        if (++step_count > opts.max_steps) {
            stats.error = "step budget exhausted";
            s = unstack(n, y);
            return TerminalVerdict::step_underflow;
        }
        h = std::min(h, t1 - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            stats.error = "step size underflow";
            s = unstack(n, y);
            return TerminalVerdict::step_underflow;
        }

        for (int i = 1; i < 7; ++i) {
            Vector yi = y;
            for (int j = 0; j < i; ++j)
                if (kDpA[i][j] != 0.0) yi += (h * kDpA[i][j]) * k[j];
            k[i] = field(yi);
        }
        Vector y5 = y;
        for (int i = 0; i < 7; ++i)
            if (kDpB5[i] != 0.0) y5 += (h * kDpB5[i]) * k[i];

        double err = 0.0;
        for (Index i = 0; i < y.size(); ++i) {
            double diff = 0.0;
            for (int j = 0; j < 7; ++j)
                if (kDpB5[j] != kDpB4[j]) diff += (kDpB5[j] - kDpB4[j]) * k[j](i);
            diff *= h;
            const double scale = opts.atol + opts.rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
            err += (diff / scale) * (diff / scale);
        }
        err = std::sqrt(err / static_cast<double>(y.size()));

        if (err <= 1.0) {
            t += h;
            // Domain guard: measure the worst excursion before repairing it.
            double excursion = std::max(0.0, -y5.minCoeff());
            const Vector sums = y5.head(n) + y5.tail(n);
            excursion = std::max(excursion, std::max(0.0, sums.maxCoeff() - 1.0));
            stats.max_excursion = std::max(stats.max_excursion, excursion);
            if (excursion > opts.guard_abort) {
                stats.error = "accepted step left the domain by " + std::to_string(excursion);
                s = unstack(n, y);
                return TerminalVerdict::left_domain;
            }
            bool repaired = false;
            for (Index i = 0; i < y5.size(); ++i)
                if (y5(i) < 0.0 && y5(i) >= -opts.guard_clamp) {
                    y5(i) = 0.0;
                    repaired = true;
                }
            for (Index i = 0; i < n; ++i) {
                const double sum = y5(i) + y5(n + i);
                if (sum > 1.0 && sum <= 1.0 + opts.guard_clamp) {
                    y5(i) /= sum;
                    y5(n + i) /= sum;
                    repaired = true;
                }
            }
            y = y5;
            k[0] = repaired ? field(y) : Vector(k[6]);  // FSAL
            ++stats.steps_accepted;

            const double field_norm = k[0].cwiseAbs().maxCoeff();
            on_accept(t, unstack(n, y), field_norm);
            if (field_norm < opts.eps_field)
                ++streak;
            else
                streak = 0;
            if (opts.stop_on_convergence && streak >= opts.convergence_window) {
                s = unstack(n, y);
                return TerminalVerdict::converged_to;
            }
            const double factor = err == 0.0 ? 5.0 : 0.9 * std::pow(err, -0.2);
            h *= std::clamp(factor, 0.2, 5.0);
        } else {
            ++stats.steps_rejected;
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        }
    }
    s = unstack(n, y);
    return TerminalVerdict::max_time_reached;
}

}  // namespace detail

/// Integrates the infection dynamics from s0 up to opts.t_max, recording
/// every accepted step. The exact flow never leaves the physical domain, so
/// excursions beyond the guard threshold are reported as integrator failure.
inline Trajectory integrate(const BivirusModel& m, const State& s0, const IntegratorOptions& opts = {}) {
    detail::check_state_dims(m, s0);
    if (!in_domain(s0, kDomainTolIntegration)) throw std::invalid_argument("integrate: initial state outside the domain");

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(s0);

    State s = s0;
    detail::DriveStats stats;
    traj.verdict = detail::rk45_drive(m, s, 0.0, opts.t_max, opts, stats,
                                      [&traj](double t, const State& st, double) {
                                          traj.times.push_back(t);
                                          traj.states.push_back(st);
                                      });
    traj.steps_accepted = stats.steps_accepted;
    traj.steps_rejected = stats.steps_rejected;
    traj.max_domain_excursion = stats.max_excursion;
    traj.error = stats.error;
    if (traj.verdict == TerminalVerdict::converged_to) traj.limit = s;
    return traj;
}

struct ConvergenceVerdict {
    enum class Outcome { converged, not_converged, integrator_error };
    Outcome outcome = Outcome::not_converged;
    std::optional<State> limit;   ///< Newton-polished limit point
    int matched_record = -1;      ///< index into the supplied records, -1 if none
    double matched_distance = std::numeric_limits<double>::infinity();
};

inline const char* to_string(ConvergenceVerdict::Outcome o) {
    switch (o) {
        case ConvergenceVerdict::Outcome::converged: return "converged";
        case ConvergenceVerdict::Outcome::not_converged: return "not_converged";
        case ConvergenceVerdict::Outcome::integrator_error: return "integrator_error";
    }
    return "?";
}

/// Declares convergence when the field norm stays below eps_field over the
/// trailing window of recorded states, then polishes the limit with Newton
/// (holding near-extinct components at exactly zero) and matches it against
/// the supplied equilibrium records at infinity-distance 1e-5.
inline ConvergenceVerdict detect_convergence(const BivirusModel& m, const Trajectory& traj,
                                             const std::vector<EquilibriumRecord>& records,
                                             double eps_field = 1e-8, int window = 10) {
    if (traj.states.empty()) throw std::invalid_argument("detect_convergence: empty trajectory");
    constexpr double kMatchDistance = 1e-5;
    constexpr double kPolishExtinction = 1e-4;

    ConvergenceVerdict out;
    if (traj.verdict == TerminalVerdict::left_domain || traj.verdict == TerminalVerdict::step_underflow) {
        out.outcome = ConvergenceVerdict::Outcome::integrator_error;
        return out;
    }

    const auto count = static_cast<long>(traj.states.size());
    const long take = std::min<long>(window, count);
    for (long i = count - take; i < count; ++i)
        if (vector_field(m, traj.states[static_cast<size_t>(i)]).inf_norm() >= eps_field) {
            out.outcome = ConvergenceVerdict::Outcome::not_converged;
            return out;
        }

    // Newton polish of the tail state.
    const State& tail = traj.states.back();
    const Index n = m.nodes();
    const bool extinct1 = tail.x1.cwiseAbs().maxCoeff() < kPolishExtinction;
    const bool extinct2 = tail.x2.cwiseAbs().maxCoeff() < kPolishExtinction;
    State polished{Vector::Zero(n), Vector::Zero(n)};
    if (extinct1 && extinct2) {
        // nothing to polish: the limit is the disease-free state
    } else if (extinct1 || extinct2) {
        const int live = extinct1 ? 1 : 0;
        const Vector seed = (live == 0 ? tail.x1 : tail.x2).cwiseMax(1e-9).cwiseMin(1.0 - 1e-9);
        const auto sol = find_single_virus_equilibrium(m.virus[static_cast<size_t>(live)], seed, 200, 1e-12);
        if (sol.status == SingleVirusSolve::Status::no_convergence) {
            out.outcome = ConvergenceVerdict::Outcome::not_converged;
            return out;
        }
        (live == 0 ? polished.x1 : polished.x2) = sol.x;
    } else {
        const auto sol = detail::newton_full(m, tail, 1e-12);
        if (!sol) {
            out.outcome = ConvergenceVerdict::Outcome::not_converged;
            return out;
        }
        polished = *sol;
    }

    out.outcome = ConvergenceVerdict::Outcome::converged;
    out.limit = polished;
    for (size_t r = 0; r < records.size(); ++r) {
        const double dist = (stack(records[r].point) - stack(polished)).cwiseAbs().maxCoeff();
        if (dist < out.matched_distance) {
            out.matched_distance = dist;
            out.matched_record = static_cast<int>(r);
        }
    }
    if (out.matched_distance > kMatchDistance) out.matched_record = -1;
    return out;
}

/// Uniform initial conditions in the interior of the domain: every
/// coordinate uniform on (0,1), then both components jointly rescaled by
/// max_i(x1_i + x2_i) (1 + 1e-6) whenever that max exceeds one. Sample k
/// draws from stream k of the seed, so subsets are reproducible.
inline std::vector<State> sample_initial_conditions(Index n, int count, std::uint64_t rng_seed) {
    std::vector<State> out;
    out.reserve(static_cast<size_t>(std::max(0, count)));
    for (int c = 0; c < count; ++c) {
        Rng rng = make_stream(rng_seed, static_cast<std::uint64_t>(c));
        std::uniform_real_distribution<double> unit(std::numeric_limits<double>::min(), 1.0);
        State s{Vector(n), Vector(n)};
        for (Index i = 0; i < n; ++i) s.x1(i) = unit(rng);
        for (Index i = 0; i < n; ++i) s.x2(i) = unit(rng);
        const double peak = (s.x1 + s.x2).maxCoeff();
        if (peak > 1.0) {
            const double scale = peak * (1.0 + 1e-6);
            s.x1 /= scale;
            s.x2 /= scale;
        }
        out.push_back(std::move(s));
    }
    return out;
}

/// Two initial states ordered in the competitive cone: A carries more of
/// virus 1 and less of virus 2 than B. The order is strict in the vector
/// sense (componentwise with at least one strict inequality per virus).
struct OrderedPair {
    State a;
    State b;

    OrderedPair(State s_a, State s_b) : a(std::move(s_a)), b(std::move(s_b)) {
        if (a.x1.size() != b.x1.size() || a.x2.size() != b.x2.size())
            throw std::invalid_argument("OrderedPair: dimension mismatch");
        const bool v1_ge = ((a.x1 - b.x1).minCoeff() >= 0.0) && ((a.x1 - b.x1).maxCoeff() > 0.0);
        const bool v2_le = ((b.x2 - a.x2).minCoeff() >= 0.0) && ((b.x2 - a.x2).maxCoeff() > 0.0);
        if (!v1_ge || !v2_le)
            throw std::invalid_argument("OrderedPair: states do not satisfy the cone order (x1 up, x2 down)");
    }
};

struct MonotonicityResult {
    bool ordered = true;
    double first_violation_time = std::numeric_limits<double>::quiet_NaN();
    int virus = 0;        ///< 1 or 2 when a violation was found
    Index node = -1;
    double gap = 0.0;     ///< the offending (signed) margin
};

/// Integrates both members of an ordered pair on a shared time grid and
/// checks that the strict cone order persists at every sample after t = 0,
/// with margin -1e-9 to absorb roundoff.
inline MonotonicityResult monotonicity_probe(const BivirusModel& m, const OrderedPair& pair,
                                             const std::vector<double>& t_samples,
                                             IntegratorOptions opts = {}) {
    constexpr double kOrderMargin = -1e-9;
    auto interior = [&m](const State& s) {
        return s.x1.minCoeff() > 0.0 && s.x2.minCoeff() > 0.0 &&
               (Vector::Ones(m.nodes()) - s.x1 - s.x2).minCoeff() > 0.0;
    };
    if (!interior(pair.a) || !interior(pair.b))
        throw std::invalid_argument("monotonicity_probe: both states must be interior");
    opts.stop_on_convergence = false;

    MonotonicityResult out;
    State sa = pair.a;
    State sb = pair.b;
    double t = 0.0;
    for (const double target : t_samples) {
        if (target <= t) continue;
        detail::DriveStats stats_a, stats_b;
        const auto va = detail::rk45_drive(m, sa, t, target, opts, stats_a, [](double, const State&, double) {});
        const auto vb = detail::rk45_drive(m, sb, t, target, opts, stats_b, [](double, const State&, double) {});
        if (va != TerminalVerdict::max_time_reached || vb != TerminalVerdict::max_time_reached)
            throw std::runtime_error("monotonicity_probe: integrator failure (" + stats_a.error + stats_b.error + ")");
        t = target;

        Index node = 0;
        const double gap1 = (sa.x1 - sb.x1).minCoeff(&node);
        if (gap1 < kOrderMargin) {
            out = MonotonicityResult{false, t, 1, node, gap1};
            return out;
        }
        const double gap2 = (sb.x2 - sa.x2).minCoeff(&node);
        if (gap2 < kOrderMargin) {
            out = MonotonicityResult{false, t, 2, node, gap2};
            return out;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Convergence census

struct CensusRun {
    int run_id = 0;
    std::uint64_t stream_seed = 0;
    ConvergenceVerdict::Outcome outcome = ConvergenceVerdict::Outcome::not_converged;
    int matched_record = -1;
    double terminal_distance = std::numeric_limits<double>::infinity();
    double t_end = 0.0;
    double max_domain_excursion = 0.0;
};

struct CensusSummary {
    int count = 0;
    int converged = 0;   ///< converged runs that matched a known equilibrium
    std::vector<EquilibriumRecord> records;
    std::vector<std::pair<std::string, int>> histogram;  ///< label -> count
    std::vector<CensusRun> runs;

    [[nodiscard]] double converged_fraction() const {
        return count == 0 ? 0.0 : static_cast<double>(converged) / static_cast<double>(count);
    }
};

/// Stable display label for record r within the list (kind, with #j appended
/// when several records share the kind).
inline std::string record_label(const std::vector<EquilibriumRecord>& records, size_t r) {
    int same_kind = 0, ordinal = 0;
    for (size_t i = 0; i < records.size(); ++i) {
        if (records[i].kind != records[r].kind) continue;
        ++same_kind;
        if (i < r) ++ordinal;
    }
    std::string label = to_string(records[r].kind);
    if (same_kind > 1) label += "#" + std::to_string(ordinal + 1);
    return label;
}

/// Randomized convergence experiment: integrates `count` uniformly sampled
/// initial conditions, matches each limit against the enumerated equilibria
/// and reports the attained-equilibrium histogram. Runs are independent
/// tasks over the immutable model; they execute concurrently and are merged
/// by run index, so the summary is deterministic for a given seed.
inline CensusSummary convergence_census(const BivirusModel& m, int count, std::uint64_t rng_seed, double t_max,
                                        IntegratorOptions opts = {}, const EnumerationOptions& eopts = {}) {
    CensusSummary summary;
    summary.count = std::max(0, count);
    summary.records = enumerate_equilibria(m, eopts).records;
    if (summary.count == 0) return summary;

    opts.t_max = t_max;
    const std::vector<State> starts = sample_initial_conditions(m.nodes(), summary.count, rng_seed);
    summary.runs.resize(static_cast<size_t>(summary.count));

    auto run_one = [&](int i) {
        CensusRun run;
        run.run_id = i;
        run.stream_seed = detail::splitmix64(rng_seed ^ detail::splitmix64(static_cast<std::uint64_t>(i)));
        const Trajectory traj = integrate(m, starts[static_cast<size_t>(i)], opts);
        const ConvergenceVerdict verdict =
            detect_convergence(m, traj, summary.records, opts.eps_field, opts.convergence_window);
        run.outcome = verdict.outcome;
        run.matched_record = verdict.matched_record;
        run.terminal_distance = verdict.matched_distance;
        run.t_end = traj.times.back();
        run.max_domain_excursion = traj.max_domain_excursion;
        summary.runs[static_cast<size_t>(i)] = run;
    };

    const unsigned workers = std::max(1u, std::min(std::thread::hardware_concurrency(),
                                                   static_cast<unsigned>(summary.count)));
    if (workers <= 1) {
        for (int i = 0; i < summary.count; ++i) run_one(i);
    } else {
        std::vector<std::future<void>> futures;
        futures.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            futures.push_back(std::async(std::launch::async, [&, w] {
                for (int i = static_cast<int>(w); i < summary.count; i += static_cast<int>(workers)) run_one(i);
            }));
        for (auto& f : futures) f.get();
    }

    std::vector<int> counts(summary.records.size(), 0);
    int unmatched = 0;
    for (const CensusRun& run : summary.runs) {
        if (run.outcome == ConvergenceVerdict::Outcome::converged && run.matched_record >= 0) {
            ++summary.converged;
            ++counts[static_cast<size_t>(run.matched_record)];
        } else {
            ++unmatched;
        }
    }
    for (size_t r = 0; r < summary.records.size(); ++r)
        if (counts[r] > 0) summary.histogram.emplace_back(record_label(summary.records, r), counts[r]);
    if (unmatched > 0) summary.histogram.emplace_back("unconverged", unmatched);
    return summary;
}

}  // namespace bivirus
