#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace d2dmsec {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

namespace linalg {

/// Singular values below max(rows,cols) * sigma_max * 1e-12 count as zero.
constexpr double kRankCutoffFactor = 1e-12;

bool all_finite(const CMatrix& a);
bool is_hermitian(const CMatrix& h, double rel_tol = 1e-12);

int numerical_rank(const CMatrix& a);

/// Orthonormal basis Z of the solution space of A^H x = 0.
/// Z has rows(A) - rank(A^H) columns; Z^H Z = I and every entry of A^H Z
/// is below tol. Columns carry a fixed phase convention (first entry of
/// significant magnitude made real positive) so results are reproducible.
CMatrix kernel_basis(const CMatrix& a, double tol = 1e-10);

/// P = I - A (A^H A)^{-1} A^H. Requires A with full column rank; throws
/// std::domain_error otherwise (callers fall back to kernel_basis).
CMatrix orthogonal_projector_complement(const CMatrix& a);

/// Joint factorization of a pair (Fh, Eh) sharing the column count:
///   Fh = U [diag(lambda1); 0] X^H     (Fh is p x n, p >= n)
///   Eh = V [diag(lambda2), 0] X^H     (Eh is q x n, q <= n)
/// with U, V unitary, X invertible, lambda1 ascending, lambda2 descending
/// and lambda1[i]^2 + lambda2[i]^2 = 1 on the shared indices.
struct GsvdFactors {
    CMatrix u;         // p x p unitary
    CMatrix v;         // q x q unitary
    CMatrix x;         // n x n invertible
    RVector lambda1;   // length n, ascending
    RVector lambda2;   // length q, descending

    CMatrix reconstruct_first() const;   // U [diag(lambda1); 0] X^H
    CMatrix reconstruct_second() const;  // V [diag(lambda2), 0] X^H
};

GsvdFactors gsvd(const CMatrix& fh, const CMatrix& eh);

struct RankOneResult {
    CVector v;          // sqrt(lambda_1) * u_1, phase-normalized
    bool is_rank_one;   // lambda_2 / lambda_1 <= tol_ratio
    double ratio;       // lambda_2 / lambda_1 (0 when dim == 1)
};

/// Dominant eigenpair of a Hermitian PSD matrix. Throws std::domain_error
/// when H is indefinite beyond a -1e-9 * max(1, lambda_max) slack.
RankOneResult dominant_rank_one(const CMatrix& h, double tol_ratio);

/// Make the first entry of significant magnitude in each column real
/// positive (deterministic sign/phase convention for factor outputs).
void phase_normalize_columns(CMatrix& m);

}  // namespace linalg
}  // namespace d2dmsec
