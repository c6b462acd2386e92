#include <catch2/catch.hpp>

#include "bivirus/equilibria.hpp"
#include "oracles.hpp"

using namespace bivirus;

namespace {

// Independent single-virus Newton: scalar-loop field, finite-difference
// Jacobian, plain undamped iteration.
Vector oracle_single_virus_newton(const VirusParams& v, Vector x, int max_iter = 200) {
    const Index n = x.size();
    auto field = [&v, n](const Vector& y) {
        Vector f(n);
        for (Index i = 0; i < n; ++i) {
            double pair_sum = 0.0;
            for (Index j = 0; j < n; ++j) pair_sum += v.a(i, j) * y(j);
            double hoi_sum = 0.0;
            for (Index j = 0; j < n; ++j)
                for (Index l = 0; l < n; ++l) hoi_sum += v.b[static_cast<size_t>(i)](j, l) * y(j) * y(l);
            f(i) = -v.delta(i) * y(i) + (1.0 - y(i)) * (v.beta_pair * pair_sum + v.beta_hoi * hoi_sum);
        }
        return f;
    };
    for (int it = 0; it < max_iter; ++it) {
        const Vector f = field(x);
        if (f.cwiseAbs().maxCoeff() < 1e-12) return x;
        Matrix j(n, n);
        const double h = 1e-7;
        for (Index c = 0; c < n; ++c) {
            Vector plus = x, minus = x;
            plus(c) += h;
            minus(c) -= h;
            j.col(c) = (field(plus) - field(minus)) / (2.0 * h);
        }
        x += j.partialPivLu().solve(-f);
    }
    return x;
}

BivirusModel complementary_classic_model() {
    const Index n = 2;
    BivirusModel m;
    Matrix a1(n, n), a2(n, n);
    a1 << 3.0, 0.5,
          0.5, 0.4;
    a2 << 0.4, 0.5,
          0.5, 3.0;
    for (int k = 0; k < 2; ++k) {
        m.virus[static_cast<size_t>(k)].delta = Vector::Ones(n);
        m.virus[static_cast<size_t>(k)].beta_pair = 1.0;
        m.virus[static_cast<size_t>(k)].beta_hoi = 0.0;
        m.virus[static_cast<size_t>(k)].b.assign(static_cast<size_t>(n), Matrix::Zero(n, n));
    }
    m.virus[0].a = a1;
    m.virus[1].a = a2;
    return m;
}

BivirusModel subcritical_classic_model() {
    auto m = oracles::example1_model();
    for (auto& v : m.virus) {
        v.beta_hoi = 0.0;
        for (auto& bi : v.b) bi.setZero();
    }
    return m;
}

const EquilibriumRecord* find_kind(const std::vector<EquilibriumRecord>& records, EquilibriumKind kind,
                                   Stability stability) {
    for (const auto& r : records)
        if (r.kind == kind && r.stability == stability) return &r;
    return nullptr;
}

}  // namespace

TEST_CASE("single-virus solver reaches the strong endemic level from a high seed", "[equilibria][solver]") {
    const auto m = oracles::example1_model();
    const auto sol = find_single_virus_equilibrium(m.virus[0], Vector::Constant(5, 0.99));
    REQUIRE(sol.status == SingleVirusSolve::Status::converged);
    REQUIRE(sol.residual <= 1e-12);
    REQUIRE(sol.x.minCoeff() >= 0.5);  // every node heads a hyperedge here
}

TEST_CASE("single-virus solver collapses to zero in the subcritical pairwise-only case", "[equilibria][solver]") {
    const auto m = subcritical_classic_model();
    for (const double level : {0.99, 0.5, 0.1}) {
        const auto sol = find_single_virus_equilibrium(m.virus[0], Vector::Constant(5, level));
        REQUIRE(sol.status == SingleVirusSolve::Status::converged_to_dfe);
        REQUIRE(sol.x.isZero(0.0));
    }
}

TEST_CASE("single-virus solver agrees with an independent Newton oracle", "[equilibria][solver]") {
    const auto m = oracles::example2_model();
    const auto sol = find_single_virus_equilibrium(m.virus[0], Vector::Constant(5, 0.5));
    REQUIRE(sol.status == SingleVirusSolve::Status::converged);
    REQUIRE(sol.residual <= 1e-10);
    REQUIRE(sol.x.minCoeff() > 0.0);
    REQUIRE(sol.x.maxCoeff() < 1.0);

    Rng rng = make_stream(41, 0);
    std::uniform_real_distribution<double> seed_dist(0.3, 0.95);
    int agreements = 0;
    for (int trial = 0; trial < 10; ++trial) {
        Vector seed(5);
        for (Index i = 0; i < 5; ++i) seed(i) = seed_dist(rng);
        const Vector x = oracle_single_virus_newton(m.virus[0], seed);
        if (x.minCoeff() > 0.01 && x.allFinite()) {
            REQUIRE((x - sol.x).cwiseAbs().maxCoeff() < 1e-8);
            ++agreements;
        }
    }
    REQUIRE(agreements >= 5);
}

TEST_CASE("seed preconditions are enforced", "[equilibria][solver]") {
    const auto m = oracles::example1_model();
    REQUIRE_THROWS_AS(find_single_virus_equilibrium(m.virus[0], Vector::Zero(5)), std::invalid_argument);
    REQUIRE_THROWS_AS(find_single_virus_equilibrium(m.virus[0], Vector::Ones(5)), std::invalid_argument);
    REQUIRE_THROWS_AS(find_single_virus_equilibrium(m.virus[0], Vector::Constant(4, 0.5)), std::invalid_argument);
}

TEST_CASE("coexistence search finds the unstable interior point of the two-rates scenario", "[equilibria][coexistence]") {
    const auto m = oracles::example2_model();
    const auto b1 = find_single_virus_equilibrium(m.virus[0], Vector::Constant(5, 0.5));
    const auto b2 = find_single_virus_equilibrium(m.virus[1], Vector::Constant(5, 0.5));
    REQUIRE(b1.status == SingleVirusSolve::Status::converged);
    REQUIRE(b2.status == SingleVirusSolve::Status::converged);

    std::vector<State> seeds;
    for (const double lambda : {0.25, 0.5, 0.75}) seeds.push_back(State{lambda * b1.x, (1.0 - lambda) * b2.x});
    Rng rng = make_stream(42, 0);
    for (int t = 0; t < 50; ++t) seeds.push_back(oracles::random_interior_state(5, rng));

    const auto records = find_coexistence(m, seeds);
    REQUIRE_FALSE(records.empty());
    bool some_not_stable = false;
    for (const auto& rec : records) {
        REQUIRE(rec.kind == EquilibriumKind::coexistence);
        REQUIRE(rec.residual <= 1e-10);
        REQUIRE(rec.saturated);
        REQUIRE(equilibrium_structure_ok(rec.point));
        if (rec.s_jacobian >= -kNeutralBand) some_not_stable = true;
    }
    REQUIRE(some_not_stable);
}

TEST_CASE("identical pairwise-only viruses admit the halved single-virus equilibrium", "[equilibria][coexistence]") {
    const Index n = 5;
    BivirusModel m;
    Matrix a = oracles::example1_model().virus[0].a;
    a = a + Matrix(a.transpose());  // symmetric, irreducible
    for (int k = 0; k < 2; ++k) {
        m.virus[static_cast<size_t>(k)].delta = Vector::Ones(n);
        m.virus[static_cast<size_t>(k)].beta_pair = 1.0;
        m.virus[static_cast<size_t>(k)].beta_hoi = 0.0;
        m.virus[static_cast<size_t>(k)].a = a;
        m.virus[static_cast<size_t>(k)].b.assign(static_cast<size_t>(n), Matrix::Zero(n, n));
    }
    const auto single = find_single_virus_equilibrium(m.virus[0], Vector::Constant(n, 0.5));
    REQUIRE(single.status == SingleVirusSolve::Status::converged);

    // With both viruses identical, splitting the single-virus level in half
    // across the two viruses solves the coupled equations.
    const State symmetric{0.5 * single.x, 0.5 * single.x};
    REQUIRE(vector_field(m, symmetric).inf_norm() <= 1e-10);

    Rng rng = make_stream(43, 0);
    std::vector<State> seeds{State{0.5 * single.x, 0.5 * single.x}};
    for (int t = 0; t < 20; ++t) seeds.push_back(oracles::random_interior_state(n, rng));
    const auto records = find_coexistence(m, seeds);
    bool found_symmetric = false;
    for (const auto& rec : records)
        if ((stack(rec.point) - stack(symmetric)).cwiseAbs().maxCoeff() < 1e-6) found_symmetric = true;
    REQUIRE(found_symmetric);
}

TEST_CASE("no interior equilibrium exists in the tristable demonstration scenario", "[equilibria][coexistence]") {
    // The tristable regime's stable boundary points are separated by the
    // *unstable boundary* equilibria, not by an interior point: exhaustive
    // root sweeps find no coexistence equilibrium for these rates.
    const auto m = oracles::example1_model();
    Rng rng = make_stream(44, 0);
    std::vector<State> seeds;
    for (int t = 0; t < 50; ++t) seeds.push_back(oracles::random_interior_state(5, rng));
    REQUIRE(find_coexistence(m, seeds).empty());
}

TEST_CASE("enumeration of the tristable scenario", "[equilibria][enumerate]") {
    const auto m = oracles::example1_model();
    const auto result = enumerate_equilibria(m);
    REQUIRE_FALSE(result.budget_exhausted);

    const auto* dfe = find_kind(result.records, EquilibriumKind::dfe, Stability::locally_exponentially_stable);
    REQUIRE(dfe != nullptr);
    REQUIRE(dfe->s_jacobian == Approx(-0.6).margin(1e-9));

    const auto* b1 = find_kind(result.records, EquilibriumKind::boundary_v1, Stability::locally_exponentially_stable);
    const auto* b2 = find_kind(result.records, EquilibriumKind::boundary_v2, Stability::locally_exponentially_stable);
    REQUIRE(b1 != nullptr);
    REQUIRE(b2 != nullptr);
    REQUIRE(b1->point.x1.minCoeff() >= 0.5 - 1e-9);
    REQUIRE(b2->point.x2.minCoeff() >= 0.5 - 1e-9);

    for (const auto& rec : result.records) {
        REQUIRE(rec.residual <= 1e-10);
        REQUIRE(rec.nondegenerate);
        REQUIRE(equilibrium_structure_ok(rec.point));
    }
    REQUIRE(result.warnings.empty());
}

TEST_CASE("enumeration of the two-rates scenario", "[equilibria][enumerate]") {
    const auto m = oracles::example2_model();
    const auto result = enumerate_equilibria(m);

    const auto* dfe = find_kind(result.records, EquilibriumKind::dfe, Stability::unstable);
    REQUIRE(dfe != nullptr);
    REQUIRE_FALSE(dfe->saturated);
    REQUIRE(find_kind(result.records, EquilibriumKind::boundary_v1, Stability::locally_exponentially_stable));
    REQUIRE(find_kind(result.records, EquilibriumKind::boundary_v2, Stability::locally_exponentially_stable));

    bool coexistence_not_stable = false;
    for (const auto& rec : result.records)
        if (rec.kind == EquilibriumKind::coexistence && rec.s_jacobian >= -kNeutralBand) coexistence_not_stable = true;
    REQUIRE(coexistence_not_stable);

    for (const auto& rec : result.records) {
        REQUIRE(rec.residual <= 1e-10);
        REQUIRE(rec.nondegenerate);
        REQUIRE(equilibrium_structure_ok(rec.point));
    }
}

TEST_CASE("subcritical pairwise-only model has only the disease-free state", "[equilibria][enumerate]") {
    const auto result = enumerate_equilibria(subcritical_classic_model());
    REQUIRE(result.records.size() == 1);
    REQUIRE(result.records[0].kind == EquilibriumKind::dfe);
    REQUIRE(result.records[0].stability == Stability::locally_exponentially_stable);
}

TEST_CASE("boundary saturation tracks the invader block on random models", "[equilibria][property]") {
    Rng rng = make_stream(45, 0);
    int boundary_records = 0;
    for (int trial = 0; trial < 15; ++trial) {
        const auto m = oracles::random_model(4, rng);
        EnumerationOptions opts;
        opts.coexistence_random_seeds = 10;
        const auto result = enumerate_equilibria(m, opts);
        for (const auto& rec : result.records) {
            REQUIRE(rec.residual <= 1e-10);
            REQUIRE(equilibrium_structure_ok(rec.point));
            if (rec.kind != EquilibriumKind::boundary_v1 && rec.kind != EquilibriumKind::boundary_v2) continue;
            ++boundary_records;
            const Matrix j = jacobian(m, rec.point);
            const Index n = m.nodes();
            const bool v1 = rec.kind == EquilibriumKind::boundary_v1;
            const double s_own = spectral_abscissa(v1 ? j.topLeftCorner(n, n) : j.bottomRightCorner(n, n));
            const double s_other = spectral_abscissa(v1 ? j.bottomRightCorner(n, n) : j.topLeftCorner(n, n));
            REQUIRE(rec.saturated == (s_other <= kNeutralBand));
            // block-triangular structure: when the own block is clearly
            // Hurwitz, saturation decides stability
            if (s_own < -kNeutralBand && std::abs(s_other) > kNeutralBand)
                REQUIRE(rec.saturated == (rec.stability == Stability::locally_exponentially_stable));
        }
    }
    REQUIRE(boundary_records > 0);
}

TEST_CASE("disease-free local threshold", "[equilibria][conditions]") {
    SECTION("subcritical scenario passes with the circulant radius") {
        const auto rep = check_dfe_local(oracles::example1_model());
        REQUIRE(rep.passed());
        REQUIRE(rep.findings[0].evidence[0].second == Approx(0.4).margin(1e-9));
        REQUIRE(rep.findings[1].evidence[0].second == Approx(0.4).margin(1e-9));
    }
    SECTION("supercritical scenario fails with radius 4") {
        const auto rep = check_dfe_local(oracles::example2_model());
        REQUIRE_FALSE(rep.passed());
        REQUIRE(rep.findings[0].evidence[0].second == Approx(4.0).margin(1e-9));
    }
    SECTION("zero pairwise rate gives radius zero") {
        auto m = oracles::example1_model();
        m.virus[0].beta_pair = 0.0;
        m.virus[1].beta_pair = 0.0;
        const auto rep = check_dfe_local(m);
        REQUIRE(rep.passed());
        REQUIRE(rep.findings[0].evidence[0].second == 0.0);
    }
}

TEST_CASE("disease-free global threshold", "[equilibria][conditions]") {
    SECTION("strong higher-order drive defeats global extinction") {
        const auto rep = check_dfe_global(oracles::example1_model());
        REQUIRE_FALSE(rep.passed());
        REQUIRE(rep.findings[0].evidence[0].second > 1.0);
    }
    SECTION("zero tensors reduce to the local threshold") {
        const auto m = subcritical_classic_model();
        const auto global = check_dfe_global(m);
        const auto local = check_dfe_local(m);
        REQUIRE(global.passed());
        REQUIRE(global.findings[0].evidence[0].second ==
                Approx(local.findings[0].evidence[0].second).margin(1e-12));
    }
    SECTION("vanishing higher-order rate restores global extinction") {
        auto m = oracles::example1_model();
        m.virus[0].beta_hoi = 1e-6;
        m.virus[1].beta_hoi = 1e-6;
        REQUIRE(check_dfe_global(m).passed());
    }
}

TEST_CASE("tristability conditions", "[equilibria][conditions]") {
    SECTION("demonstration scenario passes with the frozen evidence") {
        const auto m = oracles::example1_model();
        const auto rep = check_tristability(m);
        REQUIRE(rep.passed());
        // virus-1 findings: radius then minimum drive
        REQUIRE(rep.findings[0].evidence[0].second == Approx(0.4).margin(1e-9));
        REQUIRE(rep.findings[1].evidence[0].second == Approx(2.9).margin(1e-9));
        const auto argmin = static_cast<int>(rep.findings[1].evidence[1].second);
        REQUIRE(argmin >= 2);
        REQUIRE(argmin <= 5);

        // node 1 scores 0.4 + 5/2 * 2 = 5.4 (two hyperedges head there)
        const auto& v = m.virus[0];
        const Vector ones_b = hoi_support(v);
        const double node1 = v.beta_pair / v.delta(0) * (v.a * ones_b)(0) +
                             v.beta_hoi / (2.0 * v.delta(0)) * ones_b.dot(v.b[0] * ones_b);
        REQUIRE(node1 == Approx(5.4).margin(1e-9));
    }
    SECTION("supercritical pairwise radius fails condition a") {
        const auto rep = check_tristability(oracles::example2_model());
        REQUIRE(rep.overall == ConditionReport::Verdict::fail);
        REQUIRE(rep.findings[0].evidence[0].second == Approx(4.0).margin(1e-9));
    }
    SECTION("no hyperedges at all makes the drive condition vacuous") {
        const auto rep = check_tristability(subcritical_classic_model());
        REQUIRE(rep.overall == ConditionReport::Verdict::not_applicable);
        REQUIRE(rep.findings[1].verdict == ConditionReport::Verdict::not_applicable);
    }
}

TEST_CASE("boundary instability checker", "[equilibria][conditions]") {
    const auto m = oracles::example2_model();
    const auto result = enumerate_equilibria(m);
    const auto* b1 = find_kind(result.records, EquilibriumKind::boundary_v1, Stability::locally_exponentially_stable);
    const auto* b2 = find_kind(result.records, EquilibriumKind::boundary_v2, Stability::locally_exponentially_stable);
    REQUIRE(b1);
    REQUIRE(b2);

    SECTION("signs match the full-Jacobian verdicts for the stable boundaries") {
        const auto rep = check_boundary_instability(m, b1->point.x1, b2->point.x2);
        REQUIRE_FALSE(rep.passed());
        REQUIRE(rep.findings[0].evidence[0].second < 0.0);  // invader block at (0, x2)
        REQUIRE(rep.findings[1].evidence[0].second < 0.0);  // invader block at (x1, 0)
    }
    SECTION("saturated host leaves the invader with its healing rates only") {
        const Vector near_one = Vector::Constant(5, 1.0 - 1e-6);
        const auto rep = check_boundary_instability(m, b1->point.x1, near_one);
        const double s = rep.findings[0].evidence[0].second;
        REQUIRE(s == Approx(-1.0).margin(1e-4));
        REQUIRE(s < 0.0);
    }
    SECTION("empty host reduces to the disease-free block") {
        const auto rep = check_boundary_instability(m, b1->point.x1, Vector::Zero(5));
        REQUIRE(rep.findings[0].evidence[0].second == Approx(3.0).margin(1e-9));
    }
}

TEST_CASE("coexistence regime determination", "[equilibria][conditions]") {
    SECTION("tristable scenario: regime determined, claim honestly unverified") {
        const auto m = oracles::example1_model();
        const auto result = enumerate_equilibria(m);
        const auto rep = check_coexistence_hypotheses(m, result.records);
        bool tristable_pass = false;
        bool claim_fail = false;
        for (const auto& f : rep.findings) {
            if (f.name == "regime_tristable") tristable_pass = f.verdict == ConditionReport::Verdict::pass;
            if (f.name == "implied_claim_verified") claim_fail = f.verdict == ConditionReport::Verdict::fail;
        }
        REQUIRE(tristable_pass);
        REQUIRE(rep.claim.find("coexistence") != std::string::npos);
        // No interior equilibrium exists for these rates (see the coexistence
        // tests above); the checker reports that honestly.
        REQUIRE(claim_fail);
    }
    SECTION("two-rates scenario: stable-boundaries regime, claim verified") {
        const auto m = oracles::example2_model();
        const auto result = enumerate_equilibria(m);
        const auto rep = check_coexistence_hypotheses(m, result.records);
        REQUIRE(rep.passed());
        bool stable_regime = false;
        for (const auto& f : rep.findings)
            if (f.name == "regime_stable_boundaries") stable_regime = f.verdict == ConditionReport::Verdict::pass;
        REQUIRE(stable_regime);
    }
    SECTION("complementary classic networks: unstable-boundaries regime, claim verified") {
        const auto m = complementary_classic_model();
        const auto result = enumerate_equilibria(m);
        const auto rep = check_coexistence_hypotheses(m, result.records);
        REQUIRE(rep.passed());
        bool unstable_regime = false;
        for (const auto& f : rep.findings)
            if (f.name == "regime_unstable_boundaries") unstable_regime = f.verdict == ConditionReport::Verdict::pass;
        REQUIRE(unstable_regime);
    }
}
