#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bivirus/model.hpp"
#include "bivirus/rng.hpp"
#include "bivirus/spectral.hpp"

namespace bivirus {

/// Components with infinity norm below this are treated as an extinct virus
/// and snapped to exactly zero before classification.
inline constexpr double kExtinctionThreshold = 1e-8;
/// Strict-interior margin used by the equilibrium structure checks.
inline constexpr double kInteriorMargin = 1e-9;
/// Row-equilibrated |det J| at or below this flags a degenerate equilibrium.
inline constexpr double kDegeneracyThreshold = 1e-10;
/// Equilibrium points closer than this in infinity norm are duplicates.
inline constexpr double kDedupDistance = 1e-6;

enum class EquilibriumKind { dfe, boundary_v1, boundary_v2, coexistence };
enum class Stability { locally_exponentially_stable, unstable, neutral };

inline const char* to_string(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::dfe: return "DFE";
        case EquilibriumKind::boundary_v1: return "boundary_v1";
        case EquilibriumKind::boundary_v2: return "boundary_v2";
        case EquilibriumKind::coexistence: return "coexistence";
    }
    return "?";
}

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::locally_exponentially_stable: return "locally_exponentially_stable";
        case Stability::unstable: return "unstable";
        case Stability::neutral: return "neutral";
    }
    return "?";
}

struct EquilibriumRecord {
    State point;
    EquilibriumKind kind = EquilibriumKind::dfe;
    double s_jacobian = 0.0;       ///< spectral abscissa of the full Jacobian
    Stability stability = Stability::neutral;
    bool nondegenerate = false;    ///< row-equilibrated |det J| above threshold
    double residual = 0.0;         ///< infinity norm of the field at the point
    bool saturated = false;
    double det_scaled = 0.0;       ///< the row-equilibrated |det J| itself
};

/// One named condition with the scalars that decided it.
struct ConditionReport {
    enum class Verdict { pass, fail, not_applicable };
    struct Finding {
        std::string name;
        Verdict verdict = Verdict::not_applicable;
        std::vector<std::pair<std::string, double>> evidence;
    };
    std::string name;
    std::vector<Finding> findings;
    Verdict overall = Verdict::not_applicable;
    std::string claim;  ///< implied existence/stability statement, when any

    [[nodiscard]] bool passed() const { return overall == Verdict::pass; }
};

inline const char* to_string(ConditionReport::Verdict v) {
    switch (v) {
        case ConditionReport::Verdict::pass: return "pass";
        case ConditionReport::Verdict::fail: return "fail";
        case ConditionReport::Verdict::not_applicable: return "not_applicable";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Single-virus reduction (the other virus identically zero)

inline Vector single_virus_field(const VirusParams& v, const Vector& x) {
    if (x.size() != v.nodes()) throw std::invalid_argument("single_virus_field: dimension mismatch");
    const Vector deficit = Vector::Ones(x.size()) - x;
    return -v.delta.cwiseProduct(x) + v.beta_pair * deficit.cwiseProduct(v.a * x) +
           v.beta_hoi * deficit.cwiseProduct(detail::hoi_pressure(v, x));
}

inline Matrix single_virus_jacobian(const VirusParams& v, const Vector& x) {
    if (x.size() != v.nodes()) throw std::invalid_argument("single_virus_jacobian: dimension mismatch");
    const Index n = x.size();
    const Vector deficit = Vector::Ones(n) - x;
    const Vector h = detail::hoi_pressure(v, x);
    Matrix j = v.beta_pair * deficit.asDiagonal() * v.a +
               v.beta_hoi * deficit.asDiagonal() * detail::hoi_pressure_jacobian(v, x);
    j -= Matrix(v.delta.asDiagonal());
    j -= Matrix((v.beta_pair * (v.a * x) + v.beta_hoi * h).asDiagonal());
    return j;
}

// ---------------------------------------------------------------------------
// Classification helpers

namespace detail {

/// Row-equilibrated |det|, assembled in log space so large systems neither
/// overflow nor underflow.
inline double scaled_abs_det(const Matrix& m) {
    Matrix a = m;
    for (Index i = 0; i < a.rows(); ++i) {
        const double norm = a.row(i).cwiseAbs().maxCoeff();
        if (norm == 0.0) return 0.0;
        a.row(i) /= norm;
    }
    const Vector diag = a.partialPivLu().matrixLU().diagonal();
    double log_det = 0.0;
    for (Index i = 0; i < diag.size(); ++i) {
        const double d = std::abs(diag(i));
        if (d == 0.0) return 0.0;
        log_det += std::log(d);
    }
    if (log_det > 700.0) return std::numeric_limits<double>::infinity();
    if (log_det < -700.0) return 0.0;
    return std::exp(log_det);
}

inline Vector snap_extinct(const Vector& x) {
    if (x.size() == 0 || x.cwiseAbs().maxCoeff() < kExtinctionThreshold) return Vector::Zero(x.size());
    return x;
}

}  // namespace detail

/// Builds the full record for a candidate equilibrium point: kind, residual,
/// Jacobian spectral abscissa, stability verdict, saturation, nondegeneracy.
/// Near-extinct components are snapped to exactly zero first.
inline EquilibriumRecord classify_equilibrium(const BivirusModel& m, const State& point) {
    detail::check_state_dims(m, point);
    EquilibriumRecord rec;
    rec.point = State{detail::snap_extinct(point.x1), detail::snap_extinct(point.x2)};
    const bool zero1 = rec.point.x1.isZero(0.0);
    const bool zero2 = rec.point.x2.isZero(0.0);
    rec.kind = zero1 && zero2   ? EquilibriumKind::dfe
               : zero2          ? EquilibriumKind::boundary_v1
               : zero1          ? EquilibriumKind::boundary_v2
                                : EquilibriumKind::coexistence;
    rec.residual = vector_field(m, rec.point).inf_norm();

    const Matrix j = jacobian(m, rec.point);
    rec.s_jacobian = spectral_abscissa(j);
    rec.stability = rec.s_jacobian < -kNeutralBand ? Stability::locally_exponentially_stable
                    : rec.s_jacobian > kNeutralBand ? Stability::unstable
                                                    : Stability::neutral;
    rec.det_scaled = detail::scaled_abs_det(j);
    rec.nondegenerate = rec.det_scaled > kDegeneracyThreshold;

    // An equilibrium is saturated when the diagonal Jacobian block belonging
    // to its zero components has no eigenvalue with positive real part;
    // interior equilibria are saturated by definition.
    const Index n = m.nodes();
    switch (rec.kind) {
        case EquilibriumKind::dfe:
            rec.saturated = rec.s_jacobian <= kNeutralBand;
            break;
        case EquilibriumKind::boundary_v1:
            rec.saturated = spectral_abscissa(j.bottomRightCorner(n, n)) <= kNeutralBand;
            break;
        case EquilibriumKind::boundary_v2:
            rec.saturated = spectral_abscissa(j.topLeftCorner(n, n)) <= kNeutralBand;
            break;
        case EquilibriumKind::coexistence:
            rec.saturated = true;
            break;
    }
    return rec;
}

/// Structure every equilibrium must have: per virus the component vector is
/// exactly zero or strictly inside (0,1), and the per-node infection total
/// stays strictly below one.
inline bool equilibrium_structure_ok(const State& s, double margin = kInteriorMargin) {
    auto component_ok = [margin](const Vector& x) {
        if (x.isZero(0.0)) return true;
        return x.minCoeff() > margin && x.maxCoeff() < 1.0 - margin;
    };
    return component_ok(s.x1) && component_ok(s.x2) && (Vector::Ones(s.nodes()) - s.x1 - s.x2).minCoeff() > margin;
}

// ---------------------------------------------------------------------------
// Solvers

struct SingleVirusSolve {
    enum class Status { converged, converged_to_dfe, no_convergence };
    Status status = Status::no_convergence;
    Vector x;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

/// Endemic-level solver for one virus in isolation. A damped (gamma = 0.5)
/// fixed-point sweep of
///   x_i <- (1 - x_i) (beta_pair (a x)_i + beta_hoi x' b_i x) / delta_i
/// clamped to [0, 1 - 1e-12] brings the iterate into a Newton basin; Newton
/// on the single-virus field finishes to full accuracy. Collapse to the
/// all-zero state is a reported outcome, not an error.
inline SingleVirusSolve find_single_virus_equilibrium(const VirusParams& v, const Vector& seed, int max_iter = 1000,
                                                      double tol = 1e-12) {
    const Index n = v.nodes();
    if (seed.size() != n) throw std::invalid_argument("find_single_virus_equilibrium: seed dimension mismatch");
    if (seed.minCoeff() <= 0.0 || seed.maxCoeff() >= 1.0)
        throw std::invalid_argument("find_single_virus_equilibrium: seed must lie in (0,1)^n");

    constexpr double kGamma = 0.5;
    constexpr double kClamp = 1e-12;
    constexpr double kNewtonSwitch = 1e-3;
    constexpr int kNewtonIters = 60;

    SingleVirusSolve out;
    Vector x = seed;
    Vector best = x;
    double best_res = single_virus_field(v, x).cwiseAbs().maxCoeff();

    const int fp_budget = std::max(50, max_iter - kNewtonIters);
    int it = 0;
    for (; it < fp_budget; ++it) {
        const double res = single_virus_field(v, x).cwiseAbs().maxCoeff();
        if (res < best_res) {
            best_res = res;
            best = x;
        }
        if (res < kNewtonSwitch) break;
        if (x.cwiseAbs().maxCoeff() < 1e-10) {
            out.status = SingleVirusSolve::Status::converged_to_dfe;
            out.x = Vector::Zero(n);
            out.residual = 0.0;
            out.iterations = it;
            return out;
        }
        const Vector deficit = Vector::Ones(n) - x;
        Vector psi = (v.beta_pair * deficit.cwiseProduct(v.a * x) +
                      v.beta_hoi * deficit.cwiseProduct(detail::hoi_pressure(v, x)))
                         .cwiseQuotient(v.delta);
        psi = psi.cwiseMax(0.0).cwiseMin(1.0 - kClamp);
        x = (1.0 - kGamma) * x + kGamma * psi;
    }

    x = best_res < single_virus_field(v, x).cwiseAbs().maxCoeff() ? best : x;
    double res = single_virus_field(v, x).cwiseAbs().maxCoeff();
    for (int k = 0; k < kNewtonIters && res > tol; ++k, ++it) {
        const Vector f = single_virus_field(v, x);
        Vector step = single_virus_jacobian(v, x).partialPivLu().solve(-f);
        if (!step.allFinite()) break;
        double alpha = 1.0;
        Vector trial = x + step;
        int halvings = 0;
        while ((trial.minCoeff() < 0.0 || trial.maxCoeff() > 1.0 - kClamp) && halvings < 50) {
            alpha *= 0.5;
            trial = x + alpha * step;
            ++halvings;
        }
        if (halvings == 50) break;
        const double trial_res = single_virus_field(v, trial).cwiseAbs().maxCoeff();
        if (trial_res > res && alpha == 1.0) {
            // overshoot: retry with a half step before giving up
            trial = x + 0.5 * step;
            const double half_res = single_virus_field(v, trial).cwiseAbs().maxCoeff();
            if (half_res > res) break;
            x = trial;
            res = half_res;
            continue;
        }
        x = trial;
        res = trial_res;
    }

    out.x = x;
    out.residual = res;
    out.iterations = it;
    if (res <= tol)
        out.status = x.cwiseAbs().maxCoeff() < kExtinctionThreshold ? SingleVirusSolve::Status::converged_to_dfe
                                                                    : SingleVirusSolve::Status::converged;
    else
        out.status = SingleVirusSolve::Status::no_convergence;
    if (out.status == SingleVirusSolve::Status::converged_to_dfe) {
        out.x = Vector::Zero(n);
        out.residual = 0.0;
    }
    return out;
}

namespace detail {

/// Full 2n Newton iteration from one seed, damped so every iterate keeps
/// both components positive and the per-node total below one.
inline std::optional<State> newton_full(const BivirusModel& m, const State& seed, double tol, int max_iter = 80) {
    constexpr double kMargin = 1e-12;
    const Index n = m.nodes();
    Vector z = stack(seed);
    auto interior = [n](const Vector& w) {
        return w.minCoeff() > 0.0 && (w.head(n) + w.tail(n)).maxCoeff() < 1.0 - kMargin;
    };
    if (!interior(z)) return std::nullopt;
    for (int k = 0; k < max_iter; ++k) {
        const State s = unstack(n, z);
        const State f = vector_field(m, s);
        const Vector fv = stack(f);
        const double res = fv.cwiseAbs().maxCoeff();
        if (res <= tol) return s;
        Vector step = jacobian(m, s).partialPivLu().solve(-fv);
        if (!step.allFinite()) return std::nullopt;
        double alpha = 1.0;
        Vector trial = z + step;
        int halvings = 0;
        while (!interior(trial) && halvings < 60) {
            alpha *= 0.5;
            trial = z + alpha * step;
            ++halvings;
        }
        if (halvings == 60) return std::nullopt;
        z = trial;
    }
    const State s = unstack(n, z);
    if (vector_field(m, s).inf_norm() <= tol) return s;
    return std::nullopt;
}

/// Deterministic dedup: sort lexicographically on the stacked coordinates,
/// then drop points within kDedupDistance of an already kept one.
inline std::vector<State> dedup_states(std::vector<State> pts) {
    std::sort(pts.begin(), pts.end(), [](const State& a, const State& b) {
        const Vector va = stack(a), vb = stack(b);
        for (Index i = 0; i < va.size(); ++i)
            if (va(i) != vb(i)) return va(i) < vb(i);
        return false;
    });
    std::vector<State> kept;
    for (const State& p : pts) {
        bool dup = false;
        for (const State& q : kept)
            if ((stack(p) - stack(q)).cwiseAbs().maxCoeff() < kDedupDistance) {
                dup = true;
                break;
            }
        if (!dup) kept.push_back(p);
    }
    return kept;
}

}  // namespace detail

/// Hunts interior equilibria by damped full-system Newton from the given
/// seeds. Seeds that converge to a boundary or fail to converge are skipped;
/// the surviving points are deduplicated and returned fully classified. An
/// empty result is a valid outcome.
inline std::vector<EquilibriumRecord> find_coexistence(const BivirusModel& m, const std::vector<State>& seeds,
                                                       double tol = 1e-12) {
    std::vector<State> found;
    for (const State& seed : seeds) {
        const auto sol = detail::newton_full(m, seed, tol);
        if (!sol) continue;
        if (sol->x1.minCoeff() > kInteriorMargin && sol->x2.minCoeff() > kInteriorMargin) found.push_back(*sol);
    }
    std::vector<EquilibriumRecord> records;
    for (const State& p : detail::dedup_states(std::move(found))) records.push_back(classify_equilibrium(m, p));
    return records;
}

// ---------------------------------------------------------------------------
// Enumeration

struct EnumerationOptions {
    int boundary_random_seeds = 10;
    int coexistence_random_seeds = 50;
    int max_solver_calls = 400;       ///< budget over all solver invocations
    std::uint64_t rng_seed = 2024;
    double tol = 1e-12;
    int solver_max_iter = 1000;
};

struct EnumerationResult {
    std::vector<EquilibriumRecord> records;
    std::vector<std::string> warnings;
    bool budget_exhausted = false;
};

/// All-equilibria sweep: the disease-free state, every distinct single-virus
/// equilibrium reached from a seed grid, and interior equilibria from convex
/// combinations of the boundary finds plus random interior seeds. Every
/// record carries stability and nondegeneracy; degenerate Jacobians are
/// reported as warnings. Uniqueness of the boundary equilibria is unknown in
/// general, so all distinct finds are reported.
inline EnumerationResult enumerate_equilibria(const BivirusModel& m, const EnumerationOptions& opts = {}) {
    const Index n = m.nodes();
    EnumerationResult out;
    int calls = 0;
    auto budget_left = [&] {
        if (calls < opts.max_solver_calls) return true;
        out.budget_exhausted = true;
        return false;
    };

    out.records.push_back(classify_equilibrium(m, State{Vector::Zero(n), Vector::Zero(n)}));

    std::array<std::vector<Vector>, 2> boundary_levels;
    for (int k = 0; k < 2; ++k) {
        const VirusParams& v = m.virus[static_cast<size_t>(k)];
        std::vector<Vector> seeds = {Vector::Constant(n, 0.99), Vector::Constant(n, 0.5), Vector::Constant(n, 0.25)};
        const SpectralSummary sum = spectral_summary(v.a);
        if (sum.dominant_eigvec) {
            const Vector& p = *sum.dominant_eigvec;
            seeds.push_back(p * (0.5 / p.maxCoeff()));
        }
        Rng rng = make_stream(opts.rng_seed, 100 + static_cast<std::uint64_t>(k));
        std::uniform_real_distribution<double> unit(1e-3, 1.0 - 1e-3);
        for (int r = 0; r < opts.boundary_random_seeds; ++r) {
            Vector s(n);
            for (Index i = 0; i < n; ++i) s(i) = unit(rng);
            seeds.push_back(s);
        }

        std::vector<State> finds;
        for (const Vector& seed : seeds) {
            if (!budget_left()) break;
            ++calls;
            const auto sol = find_single_virus_equilibrium(v, seed, opts.solver_max_iter, opts.tol);
            if (sol.status != SingleVirusSolve::Status::converged) continue;
            State p{Vector::Zero(n), Vector::Zero(n)};
            (k == 0 ? p.x1 : p.x2) = sol.x;
            finds.push_back(p);
        }
        for (const State& p : detail::dedup_states(std::move(finds))) {
            boundary_levels[static_cast<size_t>(k)].push_back(k == 0 ? p.x1 : p.x2);
            out.records.push_back(classify_equilibrium(m, p));
        }
    }

    std::vector<State> coex_seeds;
    for (const Vector& x1 : boundary_levels[0])
        for (const Vector& x2 : boundary_levels[1])
            for (const double lambda : {0.25, 0.5, 0.75}) coex_seeds.push_back(State{lambda * x1, (1.0 - lambda) * x2});
    Rng rng = make_stream(opts.rng_seed, 777);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int r = 0; r < opts.coexistence_random_seeds; ++r) {
        State s{Vector(n), Vector(n)};
        for (Index i = 0; i < n; ++i) {
            s.x1(i) = unit(rng);
            s.x2(i) = unit(rng);
        }
        const double peak = (s.x1 + s.x2).maxCoeff();
        if (peak > 0.9) {
            s.x1 *= 0.9 / peak;
            s.x2 *= 0.9 / peak;
        }
        coex_seeds.push_back(std::move(s));
    }
    std::vector<State> usable;
    for (State& s : coex_seeds) {
        if (!budget_left()) break;
        ++calls;
        usable.push_back(std::move(s));
    }
    for (EquilibriumRecord& rec : find_coexistence(m, usable, opts.tol)) out.records.push_back(std::move(rec));

    std::stable_sort(out.records.begin(), out.records.end(), [](const EquilibriumRecord& a, const EquilibriumRecord& b) {
        if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        const Vector va = stack(a.point), vb = stack(b.point);
        for (Index i = 0; i < va.size(); ++i)
            if (va(i) != vb(i)) return va(i) < vb(i);
        return false;
    });

    for (const EquilibriumRecord& rec : out.records)
        if (!rec.nondegenerate)
            out.warnings.push_back(std::string("degenerate Jacobian (scaled |det| = ") + std::to_string(rec.det_scaled) +
                                   ") at a " + to_string(rec.kind) + " equilibrium");
    if (out.budget_exhausted) out.warnings.emplace_back("solver budget exhausted; enumeration may be partial");
    return out;
}

// ---------------------------------------------------------------------------
// Condition checkers

namespace detail {

inline Matrix pairwise_threshold_matrix(const VirusParams& v) {
    return v.beta_pair * v.delta.cwiseInverse().asDiagonal() * v.a;
}

}  // namespace detail

/// Local stability test for the disease-free state: the pairwise
/// reproduction radius rho(beta_pair D^-1 A) must fall below one for both
/// viruses.
inline ConditionReport check_dfe_local(const BivirusModel& m) {
    ConditionReport rep;
    rep.name = "dfe_local_stability";
    bool all = true;
    for (int k = 0; k < 2; ++k) {
        const double rho = spectral_radius(detail::pairwise_threshold_matrix(m.virus[static_cast<size_t>(k)]));
        ConditionReport::Finding f;
        f.name = "pairwise_radius_virus" + std::to_string(k + 1);
        f.verdict = rho < 1.0 ? ConditionReport::Verdict::pass : ConditionReport::Verdict::fail;
        f.evidence = {{"rho", rho}};
        all = all && rho < 1.0;
        rep.findings.push_back(std::move(f));
    }
    rep.overall = all ? ConditionReport::Verdict::pass : ConditionReport::Verdict::fail;
    rep.claim = "the disease-free state is locally stable";
    return rep;
}

/// Global extinction test: rho(beta_pair D^-1 A + beta_hoi D^-1 R) < 1 for
/// both viruses, with R built from the tensor column sums. Implies the
/// disease-free state attracts every trajectory.
inline ConditionReport check_dfe_global(const BivirusModel& m) {
    ConditionReport rep;
    rep.name = "dfe_global_stability";
    bool all = true;
    for (int k = 0; k < 2; ++k) {
        const VirusParams& v = m.virus[static_cast<size_t>(k)];
        const Matrix threshold =
            detail::pairwise_threshold_matrix(v) + v.beta_hoi * v.delta.cwiseInverse().asDiagonal() * r_matrix(v);
        const double rho = spectral_radius(threshold);
        ConditionReport::Finding f;
        f.name = "combined_radius_virus" + std::to_string(k + 1);
        f.verdict = rho < 1.0 ? ConditionReport::Verdict::pass : ConditionReport::Verdict::fail;
        f.evidence = {{"rho", rho}};
        all = all && rho < 1.0;
        rep.findings.push_back(std::move(f));
    }
    rep.overall = all ? ConditionReport::Verdict::pass : ConditionReport::Verdict::fail;
    rep.claim = "the disease-free state is globally exponentially stable";
    return rep;
}

/// Tristability test: subcritical pairwise spread (rho < 1) combined with a
/// strong enough higher-order drive,
///   min over supported i of beta_pair/delta_i (A 1_B)_i
///       + beta_hoi/(2 delta_i) 1_B' B_i 1_B  >  2,
/// for both viruses. When it passes, the disease-free state and one boundary
/// equilibrium per virus are simultaneously locally exponentially stable.
inline ConditionReport check_tristability(const BivirusModel& m) {
    ConditionReport rep;
    rep.name = "tristability";
    bool any_na = false;
    bool all = true;
    for (int k = 0; k < 2; ++k) {
        const VirusParams& v = m.virus[static_cast<size_t>(k)];
        const std::string suffix = "_virus" + std::to_string(k + 1);

        const double rho = spectral_radius(detail::pairwise_threshold_matrix(v));
        ConditionReport::Finding fa;
        fa.name = "pairwise_radius" + suffix;
        fa.verdict = rho < 1.0 ? ConditionReport::Verdict::pass : ConditionReport::Verdict::fail;
        fa.evidence = {{"rho", rho}};
        all = all && rho < 1.0;
        rep.findings.push_back(std::move(fa));

        const Vector ones_b = hoi_support(v);
        ConditionReport::Finding fb;
        fb.name = "hoi_drive_minimum" + suffix;
        if (ones_b.maxCoeff() == 0.0) {
            fb.verdict = ConditionReport::Verdict::not_applicable;
            any_na = true;
        } else {
            double min_value = std::numeric_limits<double>::infinity();
            Index argmin = 0;
            const Vector a_ones = v.a * ones_b;
            for (Index i = 0; i < m.nodes(); ++i) {
                if (ones_b(i) == 0.0) continue;
                const double value = v.beta_pair / v.delta(i) * a_ones(i) +
                                     v.beta_hoi / (2.0 * v.delta(i)) *
                                         ones_b.dot(v.b[static_cast<size_t>(i)] * ones_b);
                if (value < min_value) {
                    min_value = value;
                    argmin = i;
                }
            }
            fb.verdict = min_value > 2.0 ? ConditionReport::Verdict::pass : ConditionReport::Verdict::fail;
            fb.evidence = {{"min_value", min_value}, {"argmin_node", static_cast<double>(argmin + 1)}};
            all = all && min_value > 2.0;
        }
        rep.findings.push_back(std::move(fb));
    }
    rep.overall = !all                    ? ConditionReport::Verdict::fail
                  : any_na                ? ConditionReport::Verdict::not_applicable
                                          : ConditionReport::Verdict::pass;
    rep.claim = "disease-free state and both boundary equilibria are simultaneously locally exponentially stable, "
                "with boundary levels at least 1/2 on the supported nodes";
    return rep;
}

/// Instability test for the two boundary equilibria. The spectral abscissa
/// of the invading virus's diagonal block decides the verdict: the virus-1
/// block evaluated at (0, x2) governs that equilibrium, and symmetrically
/// for (x1, 0). Both positive means both boundaries are unstable.
inline ConditionReport check_boundary_instability(const BivirusModel& m, const Vector& bar_x1, const Vector& bar_x2) {
    if (bar_x1.size() != m.nodes() || bar_x2.size() != m.nodes())
        throw std::invalid_argument("check_boundary_instability: dimension mismatch");
    ConditionReport rep;
    rep.name = "boundary_instability";
    const Index n = m.nodes();
    const VirusParams& v1 = m.virus[0];
    const VirusParams& v2 = m.virus[1];

    const double s_at_v2 = spectral_abscissa(Matrix(-Matrix(v1.delta.asDiagonal()) +
                                                    v1.beta_pair * (Vector::Ones(n) - bar_x2).asDiagonal() * v1.a));
    const double s_at_v1 = spectral_abscissa(Matrix(-Matrix(v2.delta.asDiagonal()) +
                                                    v2.beta_pair * (Vector::Ones(n) - bar_x1).asDiagonal() * v2.a));

    ConditionReport::Finding f1;
    f1.name = "invader_block_at_boundary_v2";
    f1.verdict = s_at_v2 > 0.0 ? ConditionReport::Verdict::pass : ConditionReport::Verdict::fail;
    f1.evidence = {{"s", s_at_v2}};
    rep.findings.push_back(std::move(f1));

    ConditionReport::Finding f2;
    f2.name = "invader_block_at_boundary_v1";
    f2.verdict = s_at_v1 > 0.0 ? ConditionReport::Verdict::pass : ConditionReport::Verdict::fail;
    f2.evidence = {{"s", s_at_v1}};
    rep.findings.push_back(std::move(f2));

    rep.overall = (s_at_v2 > 0.0 && s_at_v1 > 0.0) ? ConditionReport::Verdict::pass : ConditionReport::Verdict::fail;
    rep.claim = "both single-virus boundary equilibria are unstable";
    return rep;
}

/// Determines which coexistence-existence regime the model falls in and
/// states the implied claim, checked against the supplied records:
///  - unstable-boundaries regime: supercritical pairwise spread for both
///    viruses and both invader blocks positive -> some interior equilibrium
///    exists;
///  - stable-boundaries regime: supercritical pairwise spread and both
///    boundary equilibria locally exponentially stable -> some interior
///    equilibrium exists with nonnegative Jacobian abscissa;
///  - tristable regime: the tristability conditions -> same claim as the
///    stable-boundaries regime.
inline ConditionReport check_coexistence_hypotheses(const BivirusModel& m, const std::vector<EquilibriumRecord>& records) {
    ConditionReport rep;
    rep.name = "coexistence_hypotheses";

    std::vector<const EquilibriumRecord*> bv1, bv2, coex;
    for (const EquilibriumRecord& r : records) {
        if (r.kind == EquilibriumKind::boundary_v1) bv1.push_back(&r);
        if (r.kind == EquilibriumKind::boundary_v2) bv2.push_back(&r);
        if (r.kind == EquilibriumKind::coexistence) coex.push_back(&r);
    }

    std::array<double, 2> s_dfe_block{};
    for (int k = 0; k < 2; ++k) {
        const VirusParams& v = m.virus[static_cast<size_t>(k)];
        s_dfe_block[static_cast<size_t>(k)] =
            spectral_abscissa(Matrix(-Matrix(v.delta.asDiagonal()) + v.beta_pair * v.a));
    }
    const bool supercritical = s_dfe_block[0] > 0.0 && s_dfe_block[1] > 0.0;

    bool unstable_regime = false;
    double s_inv_v2 = std::numeric_limits<double>::quiet_NaN();
    double s_inv_v1 = std::numeric_limits<double>::quiet_NaN();
    if (supercritical) {
        for (const EquilibriumRecord* r1 : bv1) {
            for (const EquilibriumRecord* r2 : bv2) {
                const auto inst = check_boundary_instability(m, r1->point.x1, r2->point.x2);
                if (inst.passed()) {
                    unstable_regime = true;
                    s_inv_v2 = inst.findings[0].evidence[0].second;
                    s_inv_v1 = inst.findings[1].evidence[0].second;
                    break;
                }
            }
            if (unstable_regime) break;
        }
    }
    const bool has_stable_bv1 = std::any_of(bv1.begin(), bv1.end(), [](const EquilibriumRecord* r) {
        return r->stability == Stability::locally_exponentially_stable;
    });
    const bool has_stable_bv2 = std::any_of(bv2.begin(), bv2.end(), [](const EquilibriumRecord* r) {
        return r->stability == Stability::locally_exponentially_stable;
    });
    const bool stable_regime = supercritical && has_stable_bv1 && has_stable_bv2;
    const ConditionReport tristable = check_tristability(m);
    const bool tristable_regime = tristable.passed();

    ConditionReport::Finding fu;
    fu.name = "regime_unstable_boundaries";
    fu.verdict = unstable_regime ? ConditionReport::Verdict::pass
                 : supercritical ? ConditionReport::Verdict::fail
                                 : ConditionReport::Verdict::not_applicable;
    fu.evidence = {{"s_dfe_block_virus1", s_dfe_block[0]}, {"s_dfe_block_virus2", s_dfe_block[1]}};
    if (unstable_regime) {
        fu.evidence.emplace_back("s_invader_at_boundary_v2", s_inv_v2);
        fu.evidence.emplace_back("s_invader_at_boundary_v1", s_inv_v1);
    }
    rep.findings.push_back(std::move(fu));

    ConditionReport::Finding fs;
    fs.name = "regime_stable_boundaries";
    fs.verdict = stable_regime      ? ConditionReport::Verdict::pass
                 : supercritical    ? ConditionReport::Verdict::fail
                                    : ConditionReport::Verdict::not_applicable;
    fs.evidence = {{"s_dfe_block_virus1", s_dfe_block[0]},
                   {"s_dfe_block_virus2", s_dfe_block[1]},
                   {"stable_boundary_v1", has_stable_bv1 ? 1.0 : 0.0},
                   {"stable_boundary_v2", has_stable_bv2 ? 1.0 : 0.0}};
    rep.findings.push_back(std::move(fs));

    ConditionReport::Finding ft;
    ft.name = "regime_tristable";
    ft.verdict = tristable_regime ? ConditionReport::Verdict::pass : ConditionReport::Verdict::fail;
    for (const auto& finding : tristable.findings)
        for (const auto& [key, value] : finding.evidence) ft.evidence.emplace_back(finding.name + "." + key, value);
    rep.findings.push_back(std::move(ft));

    // The implied claim, verified against the supplied records.
    bool claim_applies = false;
    bool claim_holds = false;
    if (unstable_regime) {
        claim_applies = true;
        rep.claim = "at least one interior (coexistence) equilibrium exists";
        claim_holds = !coex.empty();
    } else if (stable_regime || tristable_regime) {
        claim_applies = true;
        rep.claim = "at least one interior (coexistence) equilibrium exists and is neutrally stable or unstable";
        claim_holds = std::any_of(coex.begin(), coex.end(),
                                  [](const EquilibriumRecord* r) { return r->s_jacobian >= -kNeutralBand; });
    } else {
        rep.claim = "no coexistence-existence regime applies";
    }

    ConditionReport::Finding fc;
    fc.name = "implied_claim_verified";
    fc.verdict = !claim_applies ? ConditionReport::Verdict::not_applicable
                 : claim_holds  ? ConditionReport::Verdict::pass
                                : ConditionReport::Verdict::fail;
    fc.evidence = {{"coexistence_records", static_cast<double>(coex.size())}};
    if (!coex.empty()) {
        double max_s = -std::numeric_limits<double>::infinity();
        for (const EquilibriumRecord* r : coex) max_s = std::max(max_s, r->s_jacobian);
        fc.evidence.emplace_back("max_s_jacobian", max_s);
    }
    rep.findings.push_back(std::move(fc));

    rep.overall = !claim_applies ? ConditionReport::Verdict::not_applicable
                  : claim_holds  ? ConditionReport::Verdict::pass
                                 : ConditionReport::Verdict::fail;
    return rep;
}

}  // namespace bivirus
