#include "d2dmsec/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace d2dmsec::linalg {

bool all_finite(const CMatrix& a) {
    return a.allFinite();
}

bool is_hermitian(const CMatrix& h, double rel_tol) {
    if (h.rows() != h.cols()) return false;
    const double scale = std::max(1.0, h.norm());
    return (h - h.adjoint()).norm() <= rel_tol * scale;
}

void phase_normalize_columns(CMatrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double colmax = m.col(j).cwiseAbs().maxCoeff();
        if (colmax <= 0.0) continue;
        Eigen::Index pivot = 0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            if (std::abs(m(i, j)) > 0.5 * colmax) { pivot = i; break; }
        }
        const Complex p = m(pivot, j);
        m.col(j) *= std::conj(p) / std::abs(p);
        m(pivot, j) = Complex(m(pivot, j).real(), 0.0);  // kill rounding residue
    }
}

namespace {

double rank_cutoff(Eigen::Index rows, Eigen::Index cols, double sigma_max) {
    return static_cast<double>(std::max(rows, cols)) * sigma_max * kRankCutoffFactor;
}

// Full SVD with the phase convention applied to U (compensated in V so
// A = U S V^H still holds exactly).
struct Svd {
    CMatrix u;
    RVector s;
    CMatrix v;
};

Svd full_svd(const CMatrix& a) {
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Svd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    const Eigen::Index k = std::min(a.rows(), a.cols());
    for (Eigen::Index j = 0; j < out.u.cols(); ++j) {
        const double colmax = out.u.col(j).cwiseAbs().maxCoeff();
        if (colmax <= 0.0) continue;
        Eigen::Index pivot = 0;
        for (Eigen::Index i = 0; i < out.u.rows(); ++i) {
            if (std::abs(out.u(i, j)) > 0.5 * colmax) { pivot = i; break; }
        }
        const Complex p = out.u(pivot, j);
        const Complex phase = std::conj(p) / std::abs(p);
        out.u.col(j) *= phase;
        if (j < k && j < out.v.cols()) out.v.col(j) *= phase;
    }
    return out;
}

}  // namespace

int numerical_rank(const CMatrix& a) {
    if (a.size() == 0) return 0;
    Eigen::JacobiSVD<CMatrix> svd(a);
    const RVector& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) return 0;
    const double cut = rank_cutoff(a.rows(), a.cols(), s(0));
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > cut) ++r;
    return r;
}

CMatrix kernel_basis(const CMatrix& a, double tol) {
    if (!all_finite(a)) throw std::invalid_argument("kernel_basis: non-finite input");
    const Eigen::Index m = a.rows();
    Svd svd = full_svd(a);
    const double smax = svd.s.size() > 0 ? svd.s(0) : 0.0;
    const double cut = rank_cutoff(a.rows(), a.cols(), smax);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.s.size(); ++i)
        if (svd.s(i) > cut) ++rank;
    CMatrix z = svd.u.rightCols(m - rank);
    phase_normalize_columns(z);
    if (z.cols() > 0 && (a.adjoint() * z).cwiseAbs().maxCoeff() > tol)
        throw std::runtime_error("kernel_basis: residual above tolerance");
    return z;
}

CMatrix orthogonal_projector_complement(const CMatrix& a) {
    if (!all_finite(a)) throw std::invalid_argument("projector: non-finite input");
    Svd svd = full_svd(a);
    const double smax = svd.s.size() > 0 ? svd.s(0) : 0.0;
    const double cut = rank_cutoff(a.rows(), a.cols(), smax);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.s.size(); ++i)
        if (svd.s(i) > cut) ++rank;
    if (rank < a.cols())
        throw std::domain_error("projector: rank-deficient input");
    const CMatrix ur = svd.u.leftCols(rank);
    CMatrix p = CMatrix::Identity(a.rows(), a.rows()) - ur * ur.adjoint();
    return ((p + p.adjoint()) * 0.5).eval();
}

CMatrix GsvdFactors::reconstruct_first() const {
    const Eigen::Index p = u.rows(), n = x.rows();
    CMatrix c = CMatrix::Zero(p, n);
    for (Eigen::Index i = 0; i < n; ++i) c(i, i) = lambda1(i);
    return u * c * x.adjoint();
}

CMatrix GsvdFactors::reconstruct_second() const {
    const Eigen::Index q = v.rows(), n = x.rows();
    CMatrix s = CMatrix::Zero(q, n);
    for (Eigen::Index i = 0; i < q; ++i) s(i, i) = lambda2(i);
    return v * s * x.adjoint();
}

GsvdFactors gsvd(const CMatrix& fh, const CMatrix& eh) {
    if (fh.cols() != eh.cols())
        throw std::invalid_argument("gsvd: column count mismatch");
    const Eigen::Index n = fh.cols(), p = fh.rows(), q = eh.rows();
    if (n < 1 || p < n || q > n)
        throw std::invalid_argument("gsvd: need rows(Fh) >= cols >= rows(Eh)");
    if (!all_finite(fh) || !all_finite(eh))
        throw std::invalid_argument("gsvd: non-finite input");

    // Two-step construction: orthonormalize the stack, then a CS split of
    // the two blocks via one more SVD.
    CMatrix t(p + q, n);
    t.topRows(p) = fh;
    t.bottomRows(q) = eh;
    Svd ts = full_svd(t);
    const double cut = rank_cutoff(t.rows(), t.cols(), ts.s.size() ? ts.s(0) : 0.0);
    for (Eigen::Index i = 0; i < n; ++i)
        if (ts.s(i) <= cut) throw std::domain_error("gsvd: stacked matrix is rank-deficient");

    const CMatrix q1 = ts.u.topLeftCorner(p, n);
    const CMatrix q2 = ts.u.bottomLeftCorner(q, n);

    // Q1 = U C W^H with c ascending; then Q2 W has orthogonal columns with
    // norms sqrt(1 - c_i^2), descending, and at most q of them nonzero.
    Svd q1s = full_svd(q1);  // singular values descending
    CMatrix u(p, p);
    CMatrix w(n, n);
    RVector c(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        c(i) = std::min(1.0, q1s.s(n - 1 - i));
        u.col(i) = q1s.u.col(n - 1 - i);
        w.col(i) = q1s.v.col(n - 1 - i);
    }
    for (Eigen::Index i = n; i < p; ++i) u.col(i) = q1s.u.col(i);

    RVector s(q);
    const CMatrix q2w = q2 * w;
    CMatrix v = CMatrix::Zero(q, q);
    for (Eigen::Index i = 0; i < q; ++i) {
        const double nrm = q2w.col(i).norm();
        if (nrm > 1e-12) {
            v.col(i) = q2w.col(i) / nrm;
            s(i) = nrm;
        } else {
            s(i) = std::sqrt(std::max(0.0, 1.0 - c(i) * c(i)));
        }
    }
    // complete columns whose subchannel gain vanished; phases of the data
    // columns are pinned by Q2 W = V diag(s), so only these are normalized
    for (Eigen::Index i = 0; i < q; ++i) {
        if (v.col(i).norm() > 0.5) continue;
        for (Eigen::Index attempt = 0; attempt < q; ++attempt) {
            CVector residual = CVector::Unit(q, (i + attempt) % q);
            for (Eigen::Index j = 0; j < q; ++j)
                if (j != i && v.col(j).norm() > 0.5)
                    residual -= v.col(j).dot(residual) * v.col(j);
            if (residual.norm() > 1e-6) {
                CMatrix filled = residual.normalized();
                phase_normalize_columns(filled);
                v.col(i) = filled.col(0);
                break;
            }
        }
    }

    CMatrix x = ts.v * ts.s.head(n).asDiagonal() * w;

    GsvdFactors out;
    out.u = std::move(u);
    out.v = std::move(v);
    out.x = std::move(x);
    out.lambda1 = std::move(c);
    out.lambda2 = std::move(s);
    return out;
}

RankOneResult dominant_rank_one(const CMatrix& h, double tol_ratio) {
    if (!all_finite(h)) throw std::invalid_argument("dominant_rank_one: non-finite input");
    if (!is_hermitian(h, 1e-10))
        throw std::invalid_argument("dominant_rank_one: input is not Hermitian");
    const CMatrix hs = (h + h.adjoint()) * 0.5;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hs);
    const RVector& ev = es.eigenvalues();  // ascending
    const Eigen::Index d = hs.rows();
    const double lmax = ev(d - 1);
    if (ev(0) < -1e-9 * std::max(1.0, lmax))
        throw std::domain_error("dominant_rank_one: matrix is indefinite beyond tolerance");

    RankOneResult out;
    if (lmax <= 1e-14 * std::max(1.0, hs.norm())) {
        out.v = CVector::Zero(d);   // rank zero: exactly representable
        out.is_rank_one = true;
        out.ratio = 0.0;
        return out;
    }
    const double l2 = d > 1 ? std::max(0.0, ev(d - 2)) : 0.0;
    out.ratio = l2 / lmax;
    out.is_rank_one = out.ratio <= tol_ratio;
    CMatrix u1 = es.eigenvectors().col(d - 1);
    phase_normalize_columns(u1);
    out.v = std::sqrt(lmax) * u1.col(0);
    return out;
}

}  // namespace d2dmsec::linalg
