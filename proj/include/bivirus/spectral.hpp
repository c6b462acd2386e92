#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>

#include "bivirus/model.hpp"

namespace bivirus {

/// |s| below this band counts as a zero spectral abscissa (neutral verdict).
inline constexpr double kNeutralBand = 1e-8;
/// Modulus gap below which the dominant eigenvalue is flagged as possibly
/// non-simple instead of erroring out.
inline constexpr double kSimplicityGap = 1e-6;

/// Eigenstructure digest of a nonnegative matrix.
struct SpectralSummary {
    double rho = 0.0;                      ///< spectral radius
    double s_abscissa = 0.0;               ///< max real part over the spectrum
    std::optional<Vector> dominant_eigvec; ///< entrywise positive, sums to 1
    bool is_irreducible = false;
    bool degenerate_dominant = false;      ///< modulus gap under kSimplicityGap
};

/// True iff the nonzero-pattern digraph of a nonnegative matrix is strongly
/// connected.
inline bool is_irreducible(const Matrix& mat) {
    detail::require_square(mat, "is_irreducible");
    return detail::pattern_strongly_connected(mat);
}

namespace detail {

inline Eigen::VectorXcd eigenvalues_of(const Matrix& mat) {
    Eigen::EigenSolver<Matrix> solver(mat, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw std::runtime_error("eigensolver failed to converge");
    return solver.eigenvalues();
}

/// Real, entrywise-positive eigenvector for the dominant eigenvalue of an
/// irreducible nonnegative matrix, normalized to unit sum. Returns nullopt
/// when positivity cannot be certified (numerical failure).
inline std::optional<Vector> dominant_positive_eigenvector(const Matrix& mat, double rho) {
    Eigen::EigenSolver<Matrix> solver(mat, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success) return std::nullopt;
    const auto& vals = solver.eigenvalues();
    Index best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < vals.size(); ++i) {
        const double dist = std::abs(vals(i) - std::complex<double>(rho, 0.0));
        if (dist < best_dist) {
            best_dist = dist;
            best = i;
        }
    }
    Eigen::VectorXcd vc = solver.eigenvectors().col(best);
    // Rotate out the arbitrary complex phase, then fix the overall sign.
    Index argmax = 0;
    vc.cwiseAbs().maxCoeff(&argmax);
    vc *= std::abs(vc(argmax)) / vc(argmax);
    Vector v = vc.real();
    if (v.sum() < 0.0) v = -v;
    const double scale = v.sum();
    if (!(scale > 0.0)) return std::nullopt;
    v /= scale;
    if (v.minCoeff() <= 0.0) return std::nullopt;
    return v;
}

}  // namespace detail

/// Max real part over the eigenvalues.
inline double spectral_abscissa(const Matrix& mat) {
    detail::require_square(mat, "spectral_abscissa");
    if (mat.rows() == 0) throw std::invalid_argument("spectral_abscissa: empty matrix");
    return detail::eigenvalues_of(mat).real().maxCoeff();
}

/// Spectral radius of a nonnegative matrix. For irreducible input the
/// dominant eigenvalue is certified to carry a positive eigenvector; a
/// failed certificate signals a numerical fault, not a model property.
inline double spectral_radius(const Matrix& mat) {
    detail::require_square(mat, "spectral_radius");
    if (mat.rows() == 0) throw std::invalid_argument("spectral_radius: empty matrix");
    if (mat.minCoeff() < 0.0) throw std::invalid_argument("spectral_radius: negative entries");
    const double rho = detail::eigenvalues_of(mat).cwiseAbs().maxCoeff();
    if (detail::pattern_strongly_connected(mat) && rho > 0.0) {
        if (!detail::dominant_positive_eigenvector(mat, rho))
            throw std::runtime_error("spectral_radius: positive dominant eigenvector could not be certified");
    }
    return rho;
}

/// Full digest; dominant_eigvec is populated only for irreducible input
/// with a clearly simple dominant eigenvalue.
inline SpectralSummary spectral_summary(const Matrix& mat) {
    detail::require_square(mat, "spectral_summary");
    if (mat.minCoeff() < 0.0) throw std::invalid_argument("spectral_summary: negative entries");
    SpectralSummary out;
    const Eigen::VectorXcd vals = detail::eigenvalues_of(mat);
    out.rho = vals.cwiseAbs().maxCoeff();
    out.s_abscissa = vals.real().maxCoeff();
    out.is_irreducible = detail::pattern_strongly_connected(mat);

    std::ptrdiff_t near_top = 0;
    for (Index i = 0; i < vals.size(); ++i)
        if (std::abs(vals(i)) > out.rho - kSimplicityGap * std::max(1.0, out.rho)) ++near_top;
    out.degenerate_dominant = near_top > 1;

    if (out.is_irreducible && out.rho > 0.0 && !out.degenerate_dominant)
        out.dominant_eigvec = detail::dominant_positive_eigenvector(mat, out.rho);
    return out;
}

/// Three-way sign of the spectral abscissa of Lambda + N, cross-checked
/// against the position of rho(-Lambda^{-1} N) relative to 1. The two
/// routes must agree; a strict contradiction is a numerical failure.
struct EigspecVerdict {
    enum class Sign { negative, zero, positive };
    Sign verdict = Sign::zero;
    double s = 0.0;    ///< spectral abscissa of Lambda + N
    double rho = 0.0;  ///< spectral radius of -Lambda^{-1} N
};

inline EigspecVerdict eigspec_consistency(const Matrix& lambda, const Matrix& n_mat, double tol = kNeutralBand) {
    detail::require_square(lambda, "eigspec_consistency");
    detail::require_square(n_mat, "eigspec_consistency");
    if (lambda.rows() != n_mat.rows()) throw std::invalid_argument("eigspec_consistency: size mismatch");
    if (!lambda.isDiagonal(0.0) || lambda.diagonal().maxCoeff() >= 0.0)
        throw std::invalid_argument("eigspec_consistency: Lambda must be a strictly negative diagonal matrix");
    if (n_mat.minCoeff() < 0.0) throw std::invalid_argument("eigspec_consistency: N must be nonnegative");
    if (!is_irreducible(n_mat)) throw std::invalid_argument("eigspec_consistency: N must be irreducible");

    EigspecVerdict out;
    out.s = spectral_abscissa(lambda + n_mat);
    const Vector neg_inv = (-lambda.diagonal()).cwiseInverse();
    out.rho = spectral_radius(neg_inv.asDiagonal() * n_mat);

    auto classify = [tol](double value) {
        if (value > tol) return EigspecVerdict::Sign::positive;
        if (value < -tol) return EigspecVerdict::Sign::negative;
        return EigspecVerdict::Sign::zero;
    };
    const auto from_s = classify(out.s);
    const auto from_rho = classify(out.rho - 1.0);
    if ((from_s == EigspecVerdict::Sign::positive && from_rho == EigspecVerdict::Sign::negative) ||
        (from_s == EigspecVerdict::Sign::negative && from_rho == EigspecVerdict::Sign::positive))
        throw std::runtime_error("eigspec_consistency: abscissa and radius routes contradict each other");
    out.verdict = from_s;
    return out;
}

/// Hurwitz test for a Metzler matrix, with a constructive witness: when the
/// matrix is Hurwitz, x solving mat*x = -1 is entrywise positive and
/// certifies stability (mat*x strictly negative).
struct MetzlerHurwitzResult {
    bool hurwitz = false;
    std::optional<Vector> certificate;  ///< x >> 0 with mat*x << 0
};

inline MetzlerHurwitzResult metzler_hurwitz(const Matrix& mat) {
    detail::require_square(mat, "metzler_hurwitz");
    const Index n = mat.rows();
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            if (i != j && mat(i, j) < 0.0) throw std::invalid_argument("metzler_hurwitz: negative off-diagonal entry");

    MetzlerHurwitzResult out;
    out.hurwitz = spectral_abscissa(mat) < 0.0;
    if (!out.hurwitz) return out;

    Vector x = mat.partialPivLu().solve(Vector::Constant(n, -1.0));
    if (x.minCoeff() > 0.0 && (mat * x).maxCoeff() < 0.0) out.certificate = std::move(x);
    return out;
}

}  // namespace bivirus
