#pragma once

#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace bivirus {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Domain tolerance used while integrating (absorbs floating-point drift).
inline constexpr double kDomainTolIntegration = 1e-9;
/// Domain tolerance used when reporting equilibria (exact membership).
inline constexpr double kDomainTolExact = 0.0;

/// Parameters of one virus: per-node healing rates, a shared pairwise
/// infection rate, a shared higher-order (three-body) infection rate, the
/// pairwise interaction matrix and one interaction matrix per head node
/// describing the joint influence of node pairs on that node.
struct VirusParams {
    Vector delta;              ///< healing rate per node, strictly positive
    double beta_pair = 0.0;    ///< pairwise infection rate
    double beta_hoi = 0.0;     ///< higher-order infection rate
    Matrix a;                  ///< a(i,j): influence of node j on node i
    std::vector<Matrix> b;     ///< b[i](j,l): joint influence of (j,l) on node i

    [[nodiscard]] Index nodes() const { return delta.size(); }
};

/// Two competing viruses over a common node set.
struct BivirusModel {
    std::array<VirusParams, 2> virus;

    [[nodiscard]] Index nodes() const { return virus[0].nodes(); }
};

/// Infected fractions per node for both viruses. Also used for field values,
/// in which case the members hold the time derivatives (dx1, dx2).
struct State {
    Vector x1;
    Vector x2;

    [[nodiscard]] Index nodes() const { return x1.size(); }
    [[nodiscard]] double inf_norm() const {
        const double n1 = x1.size() ? x1.cwiseAbs().maxCoeff() : 0.0;
        const double n2 = x2.size() ? x2.cwiseAbs().maxCoeff() : 0.0;
        return n1 > n2 ? n1 : n2;
    }
};

/// Stacks (x1, x2) into one 2n vector; inverse of unstack().
[[nodiscard]] inline Vector stack(const State& s) {
    Vector z(s.x1.size() + s.x2.size());
    z << s.x1, s.x2;
    return z;
}

[[nodiscard]] inline State unstack(Index n, const Vector& z) {
    if (z.size() != 2 * n) throw std::invalid_argument("unstack: vector length is not 2n");
    return State{z.head(n), z.tail(n)};
}

/// One violated model assumption; validation reports are data, not errors.
struct ModelViolation {
    int virus = 0;          ///< 1-based virus index, 0 when model-wide
    std::string rule;
    std::string detail;
};

using ValidationReport = std::vector<ModelViolation>;

namespace detail {

inline void require_square(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) throw std::invalid_argument(std::string(what) + ": matrix is not square");
}

/// Strong connectivity of the nonzero-pattern digraph, by reachability
/// checks on the pattern and its transpose.
inline bool pattern_strongly_connected(const Matrix& m) {
    const Index n = m.rows();
    if (n <= 1) return true;
    auto reaches_all = [n](auto&& edge) {
        std::vector<char> seen(static_cast<size_t>(n), 0);
        std::vector<Index> dfs_stack{0};
        seen[0] = 1;
        Index count = 1;
        while (!dfs_stack.empty()) {
            const Index u = dfs_stack.back();
            dfs_stack.pop_back();
            for (Index v = 0; v < n; ++v) {
                if (!seen[static_cast<size_t>(v)] && edge(u, v)) {
                    seen[static_cast<size_t>(v)] = 1;
                    ++count;
                    dfs_stack.push_back(v);
                }
            }
        }
        return count == n;
    };
    return reaches_all([&m](Index u, Index v) { return m(u, v) != 0.0; }) &&
           reaches_all([&m](Index u, Index v) { return m(v, u) != 0.0; });
}

inline void check_state_dims(const BivirusModel& m, const State& s) {
    if (s.x1.size() != m.nodes() || s.x2.size() != m.nodes())
        throw std::invalid_argument("state dimension does not match model");
}

/// h_i(x) = x' b[i] x, the three-body pressure on node i.
inline Vector hoi_pressure(const VirusParams& v, const Vector& x) {
    const Index n = x.size();
    Vector h(n);
    for (Index i = 0; i < n; ++i) h(i) = x.dot(v.b[static_cast<size_t>(i)] * x);
    return h;
}

/// Derivative of hoi_pressure: row i equals ((b[i] + b[i]') x)'.
inline Matrix hoi_pressure_jacobian(const VirusParams& v, const Vector& x) {
    const Index n = x.size();
    Matrix g(n, n);
    for (Index i = 0; i < n; ++i) {
        const Matrix& bi = v.b[static_cast<size_t>(i)];
        g.row(i) = (bi * x + bi.transpose() * x).transpose();
    }
    return g;
}

}  // namespace detail

/// Checks both model assumptions (positive healing rates; nonnegative and
/// irreducible pairwise matrices; nonnegative interaction tensors) plus
/// structural well-formedness. Empty report means the model is valid.
inline ValidationReport validate_model(const BivirusModel& m) {
    ValidationReport report;
    const Index n = m.nodes();
    if (n <= 0) {
        report.push_back({0, "dimension", "model has no nodes"});
        return report;
    }
    for (int k = 0; k < 2; ++k) {
        const VirusParams& v = m.virus[static_cast<size_t>(k)];
        const int vk = k + 1;
        bool dims_ok = true;
        if (v.delta.size() != n) {
            report.push_back({vk, "dimension", "healing-rate vector length " +
                                                   std::to_string(v.delta.size()) + ", expected " + std::to_string(n)});
            dims_ok = false;
        }
        if (v.a.rows() != n || v.a.cols() != n) {
            report.push_back({vk, "dimension", "pairwise matrix is " + std::to_string(v.a.rows()) + "x" +
                                                   std::to_string(v.a.cols()) + ", expected " + std::to_string(n) + "x" +
                                                   std::to_string(n)});
            dims_ok = false;
        }
        if (static_cast<Index>(v.b.size()) != n) {
            report.push_back({vk, "dimension", "tensor has " + std::to_string(v.b.size()) + " slices, expected " +
                                                   std::to_string(n)});
            dims_ok = false;
        } else {
            for (Index i = 0; i < n; ++i) {
                const Matrix& bi = v.b[static_cast<size_t>(i)];
                if (bi.rows() != n || bi.cols() != n) {
                    report.push_back({vk, "dimension", "tensor slice " + std::to_string(i + 1) + " is " +
                                                           std::to_string(bi.rows()) + "x" + std::to_string(bi.cols())});
                    dims_ok = false;
                }
            }
        }
        if (!dims_ok) continue;

        for (Index i = 0; i < n; ++i) {
            if (!(v.delta(i) > 0.0))
                report.push_back({vk, "positive_healing_rate",
                                  "delta[" + std::to_string(i + 1) + "] = " + std::to_string(v.delta(i))});
        }
        if (!(v.beta_pair > 0.0))
            report.push_back({vk, "positive_pairwise_rate", "beta_pair = " + std::to_string(v.beta_pair)});
        if (!(v.beta_hoi >= 0.0))
            report.push_back({vk, "nonnegative_hoi_rate", "beta_hoi = " + std::to_string(v.beta_hoi)});

        bool a_nonneg = true;
        for (Index i = 0; i < n && a_nonneg; ++i)
            for (Index j = 0; j < n; ++j)
                if (!(v.a(i, j) >= 0.0)) {
                    report.push_back({vk, "nonnegative_pairwise_matrix",
                                      "a(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ") = " +
                                          std::to_string(v.a(i, j))});
                    a_nonneg = false;
                    break;
                }
        if (a_nonneg && !detail::pattern_strongly_connected(v.a))
            report.push_back({vk, "irreducible_pairwise_matrix", "nonzero pattern of a is not strongly connected"});

        for (Index i = 0; i < n; ++i) {
            const Matrix& bi = v.b[static_cast<size_t>(i)];
            bool flagged = false;
            for (Index j = 0; j < n && !flagged; ++j)
                for (Index l = 0; l < n; ++l)
                    if (!(bi(j, l) >= 0.0)) {
                        report.push_back({vk, "nonnegative_hoi_tensor",
                                          "b[" + std::to_string(i + 1) + "](" + std::to_string(j + 1) + "," +
                                              std::to_string(l + 1) + ") = " + std::to_string(bi(j, l))});
                        flagged = true;
                        break;
                    }
        }
    }
    return report;
}

/// Time derivative (dx1, dx2) of the infection fractions:
///   dx^k_i = -delta^k_i x^k_i
///            + beta_pair^k (1 - x^1_i - x^2_i) sum_j a^k_ij x^k_j
///            + beta_hoi^k  (1 - x^1_i - x^2_i) sum_{j,l} b^k_ijl x^k_j x^k_l
inline State vector_field(const BivirusModel& m, const State& s) {
    detail::check_state_dims(m, s);
    const Vector deficit = Vector::Ones(m.nodes()) - s.x1 - s.x2;
    const VirusParams& v1 = m.virus[0];
    const VirusParams& v2 = m.virus[1];
    State d;
    d.x1 = -v1.delta.cwiseProduct(s.x1) + v1.beta_pair * deficit.cwiseProduct(v1.a * s.x1) +
           v1.beta_hoi * deficit.cwiseProduct(detail::hoi_pressure(v1, s.x1));
    d.x2 = -v2.delta.cwiseProduct(s.x2) + v2.beta_pair * deficit.cwiseProduct(v2.a * s.x2) +
           v2.beta_hoi * deficit.cwiseProduct(detail::hoi_pressure(v2, s.x2));
    return d;
}

/// Analytic 2n x 2n Jacobian of vector_field at s, in block form
/// [J11 J12; J21 J22] with the cross blocks diagonal.
inline Matrix jacobian(const BivirusModel& m, const State& s) {
    detail::check_state_dims(m, s);
    const Index n = m.nodes();
    const Vector deficit = Vector::Ones(n) - s.x1 - s.x2;
    const VirusParams& v1 = m.virus[0];
    const VirusParams& v2 = m.virus[1];

    const Vector ax1 = v1.a * s.x1;
    const Vector ax2 = v2.a * s.x2;
    const Vector h1 = detail::hoi_pressure(v1, s.x1);
    const Vector h2 = detail::hoi_pressure(v2, s.x2);

    // Diagonal matrix shared by the own-virus and cross blocks: the rate at
    // which raising either infection level erodes the susceptible fraction.
    const Vector drain1 = v1.beta_pair * ax1 + v1.beta_hoi * h1;
    const Vector drain2 = v2.beta_pair * ax2 + v2.beta_hoi * h2;

    Matrix j(2 * n, 2 * n);
    j.topLeftCorner(n, n) = v1.beta_pair * deficit.asDiagonal() * v1.a +
                            v1.beta_hoi * deficit.asDiagonal() * detail::hoi_pressure_jacobian(v1, s.x1);
    j.topLeftCorner(n, n) -= Matrix(v1.delta.asDiagonal()) + Matrix(drain1.asDiagonal());
    j.topRightCorner(n, n) = Matrix((-drain1).asDiagonal());
    j.bottomLeftCorner(n, n) = Matrix((-drain2).asDiagonal());
    j.bottomRightCorner(n, n) = v2.beta_pair * deficit.asDiagonal() * v2.a +
                                v2.beta_hoi * deficit.asDiagonal() * detail::hoi_pressure_jacobian(v2, s.x2);
    j.bottomRightCorner(n, n) -= Matrix(v2.delta.asDiagonal()) + Matrix(drain2.asDiagonal());
    return j;
}

/// Membership in the physical domain {x1 >= 0, x2 >= 0, x1 + x2 <= 1},
/// relaxed entrywise by tol.
inline bool in_domain(const State& s, double tol) {
    if (s.x1.size() != s.x2.size()) throw std::invalid_argument("in_domain: component lengths differ");
    if (s.x1.size() == 0) return true;
    return s.x1.minCoeff() >= -tol && s.x2.minCoeff() >= -tol && (s.x1 + s.x2).maxCoeff() <= 1.0 + tol;
}

/// 0/1 vector marking the nodes that head at least one three-body
/// interaction (entry i is 1 iff b[i] has a strictly positive entry).
inline Vector hoi_support(const VirusParams& v) {
    const Index n = static_cast<Index>(v.b.size());
    Vector ones_b = Vector::Zero(n);
    for (Index i = 0; i < n; ++i)
        if (v.b[static_cast<size_t>(i)].size() > 0 && v.b[static_cast<size_t>(i)].maxCoeff() > 0.0) ones_b(i) = 1.0;
    return ones_b;
}

/// Matrix whose row i holds the column sums of b[i]; appears in the
/// global extinction threshold for the disease-free state.
inline Matrix r_matrix(const VirusParams& v) {
    const Index n = static_cast<Index>(v.b.size());
    Matrix r(n, n);
    for (Index i = 0; i < n; ++i) r.row(i) = v.b[static_cast<size_t>(i)].colwise().sum();
    return r;
}

}  // namespace bivirus
