// Embedded primal-dual interior-point solver for the mixed cone
//   K = R+^l x SOC(q_1) x ... x PSD(d_1) x ...
// in the standard form
//   minimize c'x  s.t.  A x = b,  G x + s = h,  s in K,
// using Nesterov-Todd scalings and a Mehrotra predictor-corrector on the
// homogeneous self-dual embedding, so primal/dual infeasibility comes out
// as a certificate instead of a failure.

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "d2dmsec/conic.hpp"

namespace d2dmsec::conic {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kStepScale = 0.99;

// ------------------------------------------------------------------ layout

struct ConeLayout {
    int n_lin = 0;
    std::vector<int> soc;  // dims including the leading entry
    std::vector<int> psd;  // real symmetric dimension d (block holds d(d+1)/2)
    int rows = 0;
    int degree = 0;

    int soc_start(int k) const {
        int s = n_lin;
        for (int i = 0; i < k; ++i) s += soc[i];
        return s;
    }
    int psd_start(int k) const {
        int s = n_lin;
        for (int d : soc) s += d;
        for (int i = 0; i < k; ++i) s += psd[i] * (psd[i] + 1) / 2;
        return s;
    }
    void finalize() {
        rows = n_lin;
        degree = n_lin;
        for (int d : soc) {
            rows += d;
            degree += 1;
        }
        for (int d : psd) {
            rows += d * (d + 1) / 2;
            degree += d;
        }
    }
};

struct Standard {
    int n = 0;
    RMatrix G;
    RVector h;
    RMatrix A;
    RVector b;
    RVector c;
    ConeLayout cones;
};

// ------------------------------------------------------------ svec helpers

int svec_len(int d) { return d * (d + 1) / 2; }

void smat(const double* v, RMatrix& m, int d) {
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    int k = 0;
    for (int c = 0; c < d; ++c)
        for (int r = c; r < d; ++r, ++k) {
            const double val = (r == c) ? v[k] : v[k] * inv_sqrt2;
            m(r, c) = val;
            m(c, r) = val;
        }
}

void svec(const RMatrix& m, double* v, int d) {
    int k = 0;
    for (int c = 0; c < d; ++c)
        for (int r = c; r < d; ++r, ++k)
            v[k] = (r == c) ? m(r, c) : m(r, c) * std::numbers::sqrt2;
}

// ----------------------------------------------------------------- scaling

struct SocScale {
    double beta = 1.0;
    RVector v;  // v' J v = 1
};

struct PsdScale {
    RMatrix r, rinv;
    RVector lam;
};

struct Scaling {
    RVector d_lin;  // w_i
    std::vector<SocScale> soc;
    std::vector<PsdScale> psd;
    RVector lambda;  // scaled point, lambda = W z = W^{-T} s
};

RVector jmul(const RVector& u) {  // J u for SOC
    RVector r = -u;
    r(0) = u(0);
    return r;
}

// Apply the scaling (or its inverse/transpose) blockwise.
enum class Op { w, wt, winv, winvt };

void apply_scaling(const Scaling& sc, const ConeLayout& lay, Op op, const RVector& in,
                   RVector& out) {
    out.resize(in.size());
    for (int i = 0; i < lay.n_lin; ++i) {
        const double w = sc.d_lin(i);
        out(i) = (op == Op::w || op == Op::wt) ? in(i) * w : in(i) / w;
    }
    for (size_t k = 0; k < lay.soc.size(); ++k) {
        const int s0 = lay.soc_start(static_cast<int>(k)), d = lay.soc[k];
        const auto& ss = sc.soc[k];
        RVector u = in.segment(s0, d);
        if (op == Op::w || op == Op::wt) {
            // beta (2 v v' - J) u
            const double vu = ss.v.dot(u);
            out.segment(s0, d) = ss.beta * (2.0 * vu * ss.v - jmul(u));
        } else {
            // (1/beta) (2 (Jv)(Jv)' - J) u
            const RVector jv = jmul(ss.v);
            const double vu = jv.dot(u);
            out.segment(s0, d) = (2.0 * vu * jv - jmul(u)) / ss.beta;
        }
    }
    for (size_t k = 0; k < lay.psd.size(); ++k) {
        const int s0 = lay.psd_start(static_cast<int>(k)), d = lay.psd[k];
        const auto& ps = sc.psd[k];
        RMatrix m(d, d), t(d, d);
        smat(in.data() + s0, m, d);
        switch (op) {
            case Op::w: t = ps.r.transpose() * m * ps.r; break;
            case Op::wt: t = ps.r * m * ps.r.transpose(); break;
            case Op::winv: t = ps.rinv.transpose() * m * ps.rinv; break;
            case Op::winvt: t = ps.rinv * m * ps.rinv.transpose(); break;
        }
        t = ((t + t.transpose()) * 0.5).eval();
        svec(t, out.data() + s0, d);
    }
}

// Identity element of the cone.
RVector cone_identity(const ConeLayout& lay) {
    RVector e = RVector::Zero(lay.rows);
    for (int i = 0; i < lay.n_lin; ++i) e(i) = 1.0;
    for (size_t k = 0; k < lay.soc.size(); ++k) e(lay.soc_start(static_cast<int>(k))) = 1.0;
    for (size_t k = 0; k < lay.psd.size(); ++k) {
        const int s0 = lay.psd_start(static_cast<int>(k)), d = lay.psd[k];
        RMatrix id = RMatrix::Identity(d, d);
        svec(id, const_cast<double*>(e.data()) + s0, d);
    }
    return e;
}

// Smallest "eigenvalue" of a cone point (distance to the boundary).
double cone_min_eig(const RVector& u, const ConeLayout& lay) {
    double m = kInf;
    for (int i = 0; i < lay.n_lin; ++i) m = std::min(m, u(i));
    for (size_t k = 0; k < lay.soc.size(); ++k) {
        const int s0 = lay.soc_start(static_cast<int>(k)), d = lay.soc[k];
        m = std::min(m, u(s0) - u.segment(s0 + 1, d - 1).norm());
    }
    for (size_t k = 0; k < lay.psd.size(); ++k) {
        const int s0 = lay.psd_start(static_cast<int>(k)), d = lay.psd[k];
        RMatrix mm(d, d);
        smat(u.data() + s0, mm, d);
        Eigen::SelfAdjointEigenSolver<RMatrix> es(mm, Eigen::EigenvaluesOnly);
        m = std::min(m, es.eigenvalues()(0));
    }
    return m;
}

// Largest alpha with u + alpha du staying in the cone (u strictly inside).
double smallest_positive_root(double a, double b, double c) {
    // roots of a t^2 + b t + c with c > 0; returns +inf when f >= 0 for t >= 0
    const double eps = 1e-300;
    if (std::abs(a) < eps) {
        if (b >= 0) return kInf;
        return -c / b;
    }
    const double disc = b * b - 4.0 * a * c;
    if (a > 0) {
        if (disc <= 0 || b >= 0) return kInf;
        const double sq = std::sqrt(disc);
        return (-b - sq) / (2.0 * a);  // smaller positive root
    }
    // a < 0: exactly one positive root
    const double sq = std::sqrt(std::max(0.0, disc));
    return (-b - sq) / (2.0 * a);
}

double max_step(const RVector& u, const RVector& du, const ConeLayout& lay) {
    double alpha = kInf;
    for (int i = 0; i < lay.n_lin; ++i)
        if (du(i) < 0) alpha = std::min(alpha, -u(i) / du(i));
    for (size_t k = 0; k < lay.soc.size(); ++k) {
        const int s0 = lay.soc_start(static_cast<int>(k)), d = lay.soc[k];
        const double u0 = u(s0), d0 = du(s0);
        const auto u1 = u.segment(s0 + 1, d - 1);
        const auto d1 = du.segment(s0 + 1, d - 1);
        const double a = d0 * d0 - d1.squaredNorm();
        const double b = 2.0 * (u0 * d0 - u1.dot(d1));
        const double c = std::max(1e-300, u0 * u0 - u1.squaredNorm());
        alpha = std::min(alpha, smallest_positive_root(a, b, c));
    }
    for (size_t k = 0; k < lay.psd.size(); ++k) {
        const int s0 = lay.psd_start(static_cast<int>(k)), d = lay.psd[k];
        RMatrix mu(d, d), md(d, d);
        smat(u.data() + s0, mu, d);
        smat(du.data() + s0, md, d);
        Eigen::LLT<RMatrix> llt(mu);
        if (llt.info() != Eigen::Success) {
            // nudged factorization for a point numerically on the boundary
            llt.compute(mu + 1e-12 * std::max(1.0, mu.trace()) * RMatrix::Identity(d, d));
            if (llt.info() != Eigen::Success) return 0.0;
        }
        const RMatrix l = llt.matrixL();
        RMatrix t = l.triangularView<Eigen::Lower>().solve(md);
        t = l.triangularView<Eigen::Lower>()
                .solve(t.transpose())
                .transpose()
                .eval();  // L^{-1} md L^{-T}
        Eigen::SelfAdjointEigenSolver<RMatrix> es(((t + t.transpose()) * 0.5).eval(),
                                                  Eigen::EigenvaluesOnly);
        const double m = es.eigenvalues()(0);
        if (m < 0) alpha = std::min(alpha, -1.0 / m);
    }
    return alpha;
}

bool compute_scaling(const RVector& s, const RVector& z, const ConeLayout& lay, Scaling& sc) {
    sc.d_lin.resize(lay.n_lin);
    sc.soc.assign(lay.soc.size(), {});
    sc.psd.assign(lay.psd.size(), {});
    sc.lambda.resize(lay.rows);

    for (int i = 0; i < lay.n_lin; ++i) {
        if (!(s(i) > 0) || !(z(i) > 0)) return false;
        sc.d_lin(i) = std::sqrt(s(i) / z(i));
        sc.lambda(i) = std::sqrt(s(i) * z(i));
    }
    for (size_t k = 0; k < lay.soc.size(); ++k) {
        const int s0 = lay.soc_start(static_cast<int>(k)), d = lay.soc[k];
        const RVector sv = s.segment(s0, d), zv = z.segment(s0, d);
        const double a2 = sv(0) * sv(0) - sv.tail(d - 1).squaredNorm();
        const double b2 = zv(0) * zv(0) - zv.tail(d - 1).squaredNorm();
        if (!(a2 > 0) || !(b2 > 0)) return false;
        const double a = std::sqrt(a2), b = std::sqrt(b2);
        const RVector sb = sv / a, zb = zv / b;
        const double gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
        if (!(gamma > 0)) return false;
        SocScale& ss = sc.soc[k];
        ss.beta = std::sqrt(a / b);
        // normalized scaling point, then the hyperbolic Householder vector
        // v with W = beta (2 v v' - J) and v' J v = 1
        RVector wbar = (sb + jmul(zb)) / (2.0 * gamma);
        wbar(0) += 1.0;
        ss.v = wbar / std::sqrt(2.0 * wbar(0));
        // lambda = W z
        const double vz = ss.v.dot(zv);
        sc.lambda.segment(s0, d) = ss.beta * (2.0 * vz * ss.v - jmul(zv));
    }
    for (size_t k = 0; k < lay.psd.size(); ++k) {
        const int s0 = lay.psd_start(static_cast<int>(k)), d = lay.psd[k];
        RMatrix ms(d, d), mz(d, d);
        smat(s.data() + s0, ms, d);
        smat(z.data() + s0, mz, d);
        Eigen::LLT<RMatrix> ls(ms), lz(mz);
        if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return false;
        const RMatrix lsm = ls.matrixL();
        const RMatrix lzm = lz.matrixL();
        Eigen::JacobiSVD<RMatrix> svd(lzm.transpose() * lsm,
                                      Eigen::ComputeFullU | Eigen::ComputeFullV);
        const RVector& sig = svd.singularValues();
        if (sig(d - 1) <= 0) return false;
        PsdScale& ps = sc.psd[k];
        const RVector isq = sig.cwiseSqrt().cwiseInverse();
        ps.r = lsm * svd.matrixV() * isq.asDiagonal();
        ps.rinv = isq.asDiagonal() * svd.matrixU().transpose() * lzm.transpose();
        ps.lam = sig;
        RMatrix lam_m = sig.asDiagonal();
        svec(lam_m, sc.lambda.data() + s0, d);
    }
    return true;
}

// Jordan product u o w in cone coordinates.
void jordan_mul(const RVector& u, const RVector& w, const ConeLayout& lay, RVector& out) {
    out.resize(lay.rows);
    for (int i = 0; i < lay.n_lin; ++i) out(i) = u(i) * w(i);
    for (size_t k = 0; k < lay.soc.size(); ++k) {
        const int s0 = lay.soc_start(static_cast<int>(k)), d = lay.soc[k];
        const auto uv = u.segment(s0, d), wv = w.segment(s0, d);
        out(s0) = uv.dot(wv);
        out.segment(s0 + 1, d - 1) =
            uv(0) * wv.tail(d - 1) + wv(0) * uv.tail(d - 1);
    }
    for (size_t k = 0; k < lay.psd.size(); ++k) {
        const int s0 = lay.psd_start(static_cast<int>(k)), d = lay.psd[k];
        RMatrix mu(d, d), mw(d, d);
        smat(u.data() + s0, mu, d);
        smat(w.data() + s0, mw, d);
        RMatrix p = 0.5 * (mu * mw + mw * mu);
        svec(p, out.data() + s0, d);
    }
}

// Solve lambda o x = d for x, exploiting that the scaled lambda is diagonal
// on PSD blocks.
void jordan_div_lambda(const Scaling& sc, const ConeLayout& lay, const RVector& d_in,
                       RVector& out) {
    out.resize(lay.rows);
    for (int i = 0; i < lay.n_lin; ++i) out(i) = d_in(i) / sc.lambda(i);
    for (size_t k = 0; k < lay.soc.size(); ++k) {
        const int s0 = lay.soc_start(static_cast<int>(k)), d = lay.soc[k];
        const auto lv = sc.lambda.segment(s0, d);
        const auto dv = d_in.segment(s0, d);
        const double l0 = lv(0);
        const double det = l0 * l0 - lv.tail(d - 1).squaredNorm();
        const double x0 = (l0 * dv(0) - lv.tail(d - 1).dot(dv.tail(d - 1))) / det;
        out(s0) = x0;
        out.segment(s0 + 1, d - 1) = (dv.tail(d - 1) - x0 * lv.tail(d - 1)) / l0;
    }
    for (size_t k = 0; k < lay.psd.size(); ++k) {
        const int s0 = lay.psd_start(static_cast<int>(k)), d = lay.psd[k];
        const RVector& lam = sc.psd[k].lam;
        RMatrix md(d, d);
        smat(d_in.data() + s0, md, d);
        RMatrix x(d, d);
        for (int c = 0; c < d; ++c)
            for (int r = 0; r < d; ++r) x(r, c) = 2.0 * md(r, c) / (lam(r) + lam(c));
        svec(x, out.data() + s0, d);
    }
}

// -------------------------------------------------------------- KKT solver

// Solves, for the current scaling W,
//   [ 0   A'  G'  ] [ux]   [bx]
//   [ A   0   0   ] [uy] = [by]
//   [ G   0  -W'W ] [uz]   [bz]
// by eliminating uz and reducing to the nullspace of A.
class KktSolver {
  public:
    bool refine_debug = false;

    KktSolver(const Standard& p) : p_(p) {
        const int n = p.n, peq = static_cast<int>(p.A.rows());
        if (peq > 0) {
            Eigen::HouseholderQR<RMatrix> qr(p.A.transpose());
            RMatrix qfull = qr.householderQ() * RMatrix::Identity(n, n);
            q1_ = qfull.leftCols(peq);
            z_ = qfull.rightCols(n - peq);
            r_ = qr.matrixQR().topRows(peq).triangularView<Eigen::Upper>();
            for (int i = 0; i < peq; ++i)
                if (std::abs(r_(i, i)) < 1e-12 * std::max(1.0, std::abs(r_(0, 0))))
                    throw std::invalid_argument("conic solve: equality constraints are rank-deficient");
        } else {
            z_ = RMatrix::Identity(n, n);
        }
    }

    bool factor(const Scaling& sc, const ConeLayout& lay) {
        sc_ = &sc;
        lay_ = &lay;
        const int n = p_.n, m = static_cast<int>(p_.G.rows());
        const int nz = static_cast<int>(z_.cols());
        gs_.resize(m, n);
        RVector col(m), scaled;
        for (int j = 0; j < n; ++j) {
            col = p_.G.col(j);
            apply_scaling(sc, lay, Op::winvt, col, scaled);
            gs_.col(j) = scaled;
        }
        // QR of the scaled-and-reduced constraint matrix instead of a
        // Cholesky of its Gram matrix; the appended sqrt(delta) rows are a
        // static regularization keeping the triangular factor invertible
        const double delta = 1e-13 * std::max(1.0, gs_.squaredNorm() / n);
        RMatrix ext(m + nz, nz);
        ext.topRows(m) = gs_ * z_;
        ext.bottomRows(nz) = std::sqrt(delta) * RMatrix::Identity(nz, nz);
        qr_.compute(ext);
        rfac_ = qr_.matrixQR().topRows(nz).triangularView<Eigen::Upper>();
        for (int i = 0; i < nz; ++i)
            if (!(std::abs(rfac_(i, i)) > 0)) return false;
        return true;
    }

    // Solves, in the scaled space (zs = W uz),
    //   [ 0   A'  Gs' ] [ux]   [bx ]
    //   [ A   0   0   ] [uy] = [by ]
    //   [ Gs  0  -I   ] [zs]   [bzs]
    // with iterative refinement; the bounded third block keeps the residual
    // evaluation exact enough for the refinement to converge.
    void solve_scaled(const RVector& bx, const RVector& by, const RVector& bzs, RVector& ux,
                      RVector& uy, RVector& zs) const {
        solve_once(bx, by, bzs, ux, uy, zs);
        const int peq = static_cast<int>(p_.A.rows());
        const double rhs_norm =
            std::max({bx.norm(), peq > 0 ? by.norm() : 0.0, bzs.norm(), 1e-300});
        double prev = kInf;
        for (int pass = 0; pass < 6; ++pass) {
            RVector res_x = bx - gs_.transpose() * zs;
            if (peq > 0) res_x -= p_.A.transpose() * uy;
            RVector res_y = peq > 0 ? RVector(by - p_.A * ux) : RVector(0);
            RVector res_z = bzs - (gs_ * ux - zs);
            const double rn =
                std::max({res_x.norm(), peq > 0 ? res_y.norm() : 0.0, res_z.norm()});
            if (refine_debug) std::cerr << "   refine pass " << pass << " rn " << rn << "\n";
            if (rn <= 1e-14 * rhs_norm || rn >= 0.9 * prev) break;
            prev = rn;
            RVector cx, cy, cz;
            solve_once(res_x, res_y, res_z, cx, cy, cz);
            ux += cx;
            if (peq > 0) uy += cy;
            zs += cz;
        }
    }

  private:
    void solve_once(const RVector& bx, const RVector& by, const RVector& bzs, RVector& ux,
                    RVector& uy, RVector& zs) const {
        const int peq = static_cast<int>(p_.A.rows());
        RVector r = bx + gs_.transpose() * bzs;

        auto apply_h = [&](const RVector& v) { return RVector(gs_.transpose() * (gs_ * v)); };

        RVector x_part = RVector::Zero(p_.n);
        if (peq > 0)
            x_part = q1_ * r_.transpose().triangularView<Eigen::Lower>().solve(by);
        RVector rhs = z_.transpose() * (r - apply_h(x_part));
        // (Z'HZ + delta I) t = rhs via the two triangular factors of the QR
        RVector t = rfac_.transpose().triangularView<Eigen::Lower>().solve(rhs);
        t = rfac_.triangularView<Eigen::Upper>().solve(t);
        ux = x_part + z_ * t;

        if (peq > 0) {
            RVector resid = r - apply_h(ux);
            uy = r_.triangularView<Eigen::Upper>().solve(q1_.transpose() * resid);
        } else {
            uy.resize(0);
        }
        zs = gs_ * ux - bzs;
    }

    const Standard& p_;
    RMatrix q1_, z_, r_;
    RMatrix gs_, rfac_;
    Eigen::HouseholderQR<RMatrix> qr_;
    const Scaling* sc_ = nullptr;
    const ConeLayout* lay_ = nullptr;
};

struct IpmOutcome {
    SolveStatus status = SolveStatus::numerical_limit;
    RVector x;
    int iterations = 0;
    double gap = 0.0, pres = 0.0, dres = 0.0;
};

IpmOutcome run_ipm(const Standard& p, const SolveOptions& opts) {
    const ConeLayout& lay = p.cones;
    const int n = p.n, m = lay.rows, peq = static_cast<int>(p.A.rows());
    const double feastol = opts.tol, abstol = opts.tol, reltol = opts.tol;

    IpmOutcome out;
    KktSolver kkt(p);
    kkt.refine_debug = opts.verbose;

    const RVector e = cone_identity(lay);
    RVector x = RVector::Zero(n), y = RVector::Zero(peq);
    RVector s(m), z(m);

    // initial point from the W = I least-squares systems
    {
        Scaling id;
        id.d_lin = RVector::Ones(lay.n_lin);
        id.soc.resize(lay.soc.size());
        for (size_t k = 0; k < lay.soc.size(); ++k) {
            id.soc[k].beta = 1.0;
            id.soc[k].v = RVector::Zero(lay.soc[k]);
            id.soc[k].v(0) = 1.0;
        }
        id.psd.resize(lay.psd.size());
        for (size_t k = 0; k < lay.psd.size(); ++k) {
            id.psd[k].r = RMatrix::Identity(lay.psd[k], lay.psd[k]);
            id.psd[k].rinv = id.psd[k].r;
            id.psd[k].lam = RVector::Ones(lay.psd[k]);
        }
        id.lambda = e;
        if (!kkt.factor(id, lay)) {
            out.status = SolveStatus::numerical_limit;
            out.x = RVector::Zero(n);
            return out;
        }
        RVector ux, uy, uz;
        kkt.solve_scaled(RVector::Zero(n), p.b, p.h, ux, uy, uz);
        x = ux;
        s = p.h - p.G * x;
        double me = cone_min_eig(s, lay);
        if (me < 1e-8) s += (1.0 - me) * e;

        kkt.solve_scaled(-p.c, RVector::Zero(peq), RVector::Zero(m), ux, uy, uz);
        y = uy;
        z = uz;  // scaled == unscaled under W = I
        me = cone_min_eig(z, lay);
        if (me < 1e-8) z += (1.0 - me) * e;
    }

    double tau = 1.0, kappa = 1.0;
    const double norm_b = std::max(1.0, p.b.norm());
    const double norm_h = std::max(1.0, p.h.norm());
    const double norm_c = std::max(1.0, p.c.norm());

    Scaling sc;
    RVector rx(n), ry(peq), rz(m);

    // best iterate seen so far; finite-precision noise can spoil late
    // iterations, so termination always falls back on it. The score is
    // normalized against the acceptable floors (primal feasibility 1e-7,
    // dual 1e-5, relative gap 1e-6) so "score <= 1" means acceptable.
    RVector best_x;
    double best_tau = 1.0, best_score = kInf;
    double best_gap = kInf, best_pres = kInf, best_dres = kInf;
    const double feas2 = std::max(1e-7, opts.tol);
    const double dres2 = std::max(1e-5, opts.tol);
    const double gap2 = std::max(1e-6, opts.tol);
    double mark_score = kInf;
    int mark_iter = 0;

    auto finish = [&](SolveStatus st, int iters) {
        out.status = st;
        out.iterations = iters;
        out.x = x / tau;
        return out;
    };
    auto finish_best = [&](int iters) {
        out.iterations = iters;
        if (best_x.size() == n && best_score <= 1.0) {
            out.status = SolveStatus::optimal;
            out.x = best_x / best_tau;
            out.gap = best_gap;
            out.pres = best_pres;
            out.dres = best_dres;
        } else {
            out.status = SolveStatus::numerical_limit;
            out.x = best_x.size() == n ? RVector(best_x / best_tau) : RVector(x / tau);
        }
        return out;
    };

    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        rx = p.c * tau;
        if (peq > 0) rx += p.A.transpose() * y;
        rx += p.G.transpose() * z;
        ry = peq > 0 ? RVector(p.A * x - p.b * tau) : RVector(0);
        rz = p.G * x + s - p.h * tau;
        const double rt = kappa + p.c.dot(x) + (peq > 0 ? p.b.dot(y) : 0.0) + p.h.dot(z);

        const double gap = s.dot(z);
        const double pcost = p.c.dot(x) / tau;
        const double dcost = -(p.h.dot(z) + (peq > 0 ? p.b.dot(y) : 0.0)) / tau;
        const double gap_t = gap / (tau * tau);
        double relgap = kInf;
        if (pcost < 0)
            relgap = gap_t / (-pcost);
        else if (dcost > 0)
            relgap = gap_t / dcost;
        const double pres =
            std::max(peq > 0 ? ry.norm() / tau / norm_b : 0.0, rz.norm() / tau / norm_h);
        const double dres = rx.norm() / tau / norm_c;

        out.gap = gap_t;
        out.pres = pres;
        out.dres = dres;
        if (opts.verbose)
            std::cerr << "ipm iter " << iter << " pcost " << pcost << " gap " << gap_t
                      << " pres " << pres << " dres " << dres << " tau " << tau << " kappa "
                      << kappa << "\n";

        if (pres <= feastol && dres <= feastol && (gap_t <= abstol || relgap <= reltol))
            return finish(SolveStatus::optimal, iter);

        const double gap_rel = std::min(gap_t / std::max(1.0, std::abs(pcost)), relgap);
        const double score =
            std::max({pres / feas2, dres / dres2, gap_rel / gap2});
        if (score < best_score) {
            best_score = score;
            best_x = x;
            best_tau = tau;
            best_gap = gap_rel;
            best_pres = pres;
            best_dres = dres;
        } else if (best_score < 1.0 && score > 1e3 * best_score) {
            // converged into round-off noise; the best iterate is final
            return finish_best(iter);
        }
        if (score < 0.5 * mark_score) {
            mark_score = score;
            mark_iter = iter;
        } else if (iter - mark_iter >= 10 && best_score <= 10.0) {
            // near-converged but no material progress; settle on the best
            return finish_best(iter);
        }

        // infeasibility certificates
        const double hzby = p.h.dot(z) + (peq > 0 ? p.b.dot(y) : 0.0);
        if (hzby < 0) {
            RVector cert = p.G.transpose() * z;
            if (peq > 0) cert += p.A.transpose() * y;
            if (cert.norm() / norm_c <= feastol * (-hzby))
                return finish(SolveStatus::infeasible, iter);
        }
        const double cx = p.c.dot(x);
        if (cx < 0) {
            const double r1 = peq > 0 ? (p.A * x).norm() / norm_b : 0.0;
            const double r2 = (p.G * x + s).norm() / norm_h;
            if (std::max(r1, r2) <= feastol * (-cx))
                return finish(SolveStatus::unbounded, iter);
        }
        if (tau < 1e-12 || kappa / tau > 1e14) return finish_best(iter);

        if (!compute_scaling(s, z, lay, sc)) return finish_best(iter);
        const double mu = (sc.lambda.squaredNorm() + tau * kappa) / (lay.degree + 1);
        if (!kkt.factor(sc, lay)) return finish_best(iter);

        RVector h_scaled, rz_scaled;
        apply_scaling(sc, lay, Op::winvt, p.h, h_scaled);
        apply_scaling(sc, lay, Op::winvt, rz, rz_scaled);

        RVector u1x, u1y, u1zs;
        kkt.solve_scaled(-p.c, p.b, h_scaled, u1x, u1y, u1zs);
        const double phi1 =
            p.c.dot(u1x) + (peq > 0 ? p.b.dot(u1y) : 0.0) + h_scaled.dot(u1zs);

        RVector lam_lam;
        jordan_mul(sc.lambda, sc.lambda, lay, lam_lam);

        auto direction = [&](double eta, const RVector& d_s, double d_k, RVector& dx,
                             RVector& dy, RVector& dz, RVector& ds, double& dtau,
                             double& dkappa) {
            RVector rs;
            jordan_div_lambda(sc, lay, d_s, rs);
            const double f = -(1.0 - eta);
            RVector bzs = f * rz_scaled - rs;
            RVector u0x, u0y, u0zs;
            kkt.solve_scaled(f * rx, f * ry, bzs, u0x, u0y, u0zs);
            const double phi0 =
                p.c.dot(u0x) + (peq > 0 ? p.b.dot(u0y) : 0.0) + h_scaled.dot(u0zs);
            dtau = (f * rt - d_k / tau - phi0) / (phi1 - kappa / tau);
            dx = u0x + dtau * u1x;
            dy = peq > 0 ? RVector(u0y + dtau * u1y) : RVector(0);
            RVector zs = u0zs + dtau * u1zs;
            apply_scaling(sc, lay, Op::winv, zs, dz);
            // ds = W'(Rs - W dz) = W'(Rs - zs)
            RVector tmp = rs - zs;
            apply_scaling(sc, lay, Op::wt, tmp, ds);
            dkappa = (d_k - kappa * dtau) / tau;
        };

        // predictor
        RVector dxa, dya, dza, dsa;
        double dtaua, dkappaa;
        direction(0.0, RVector(-lam_lam), -tau * kappa, dxa, dya, dza, dsa, dtaua, dkappaa);

        double alpha = std::min({max_step(s, dsa, lay), max_step(z, dza, lay),
                                 dtaua < 0 ? -tau / dtaua : kInf,
                                 dkappaa < 0 ? -kappa / dkappaa : kInf});
        alpha = std::min(1.0, kStepScale * alpha);
        const double sigma = std::pow(1.0 - alpha, 3);

        // corrector in the scaled space
        RVector wds, wdz;
        apply_scaling(sc, lay, Op::winvt, dsa, wds);
        apply_scaling(sc, lay, Op::w, dza, wdz);
        RVector cc;
        jordan_mul(wds, wdz, lay, cc);
        RVector d_s = -lam_lam - cc + sigma * mu * e;
        const double d_k = -tau * kappa - dtaua * dkappaa + sigma * mu;

        RVector dx, dy, dz, ds;
        double dtau, dkappa;
        direction(sigma, d_s, d_k, dx, dy, dz, ds, dtau, dkappa);

        double step = std::min({max_step(s, ds, lay), max_step(z, dz, lay),
                                dtau < 0 ? -tau / dtau : kInf,
                                dkappa < 0 ? -kappa / dkappa : kInf});
        step = std::min(1.0, kStepScale * step);
        if (!(step > 1e-13) || !std::isfinite(step)) return finish_best(iter);

        x += step * dx;
        if (peq > 0) y += step * dy;
        z += step * dz;
        s += step * ds;
        tau += step * dtau;
        kappa += step * dkappa;
        out.iterations = iter + 1;
    }
    return finish_best(opts.max_iterations);
}

}  // namespace

// ---------------------------------------------------------------- lowering

struct Lowering {
    static SolveResult solve(const ConicProgram& prog, const SolveOptions& opts);
};

namespace {

void add_expr_row(RMatrix& g, RVector& h, int row, const LinExpr& e, double sign) {
    // sign = +1 encodes slack = e(x): G(row,:) = -coeffs, h(row) = constant
    for (const auto& [i, c] : e.terms) g(row, i) -= sign * c;
    h(row) += sign * e.constant;
}

}  // namespace

SolveResult Lowering::solve(const ConicProgram& prog, const SolveOptions& opts) {
    Standard p;
    p.n = prog.nvar_;

    // rows
    ConeLayout& lay = p.cones;
    lay.n_lin = static_cast<int>(prog.ineqs_.size());
    for (const auto& soc : prog.socs_) lay.soc.push_back(1 + static_cast<int>(soc.v.size()));
    for (const auto& psd : prog.psds_) lay.psd.push_back(2 * psd.h.dim());
    lay.finalize();

    p.G = RMatrix::Zero(lay.rows, p.n);
    p.h = RVector::Zero(lay.rows);
    p.A = RMatrix::Zero(prog.eqs_.size(), p.n);
    p.b = RVector::Zero(prog.eqs_.size());
    p.c = RVector::Zero(p.n);

    for (size_t i = 0; i < prog.eqs_.size(); ++i) {
        for (const auto& [j, c] : prog.eqs_[i].e.terms) p.A(static_cast<int>(i), j) += c;
        p.b(static_cast<int>(i)) = -prog.eqs_[i].e.constant;
    }
    for (size_t i = 0; i < prog.ineqs_.size(); ++i)
        add_expr_row(p.G, p.h, static_cast<int>(i), prog.ineqs_[i].e, 1.0);
    for (size_t k = 0; k < prog.socs_.size(); ++k) {
        const int s0 = lay.soc_start(static_cast<int>(k));
        add_expr_row(p.G, p.h, s0, prog.socs_[k].t, 1.0);
        for (size_t i = 0; i < prog.socs_[k].v.size(); ++i)
            add_expr_row(p.G, p.h, s0 + 1 + static_cast<int>(i), prog.socs_[k].v[i], 1.0);
    }
    for (size_t k = 0; k < prog.psds_.size(); ++k) {
        const auto& ha = prog.psds_[k].h;
        const int dc = ha.dim(), d = 2 * dc;
        const int s0 = lay.psd_start(static_cast<int>(k));
        // real embedding [[X, -Y], [Y, X]]; rows in svec order over the
        // lower triangle of the embedded matrix
        int row = s0;
        auto entry = [&](int r, int c) -> LinExpr {
            // lower-triangle entry (r, c) of the embedded matrix
            if (r < dc && c < dc) return ha.at(r, c).re;
            if (r >= dc && c >= dc) return ha.at(r - dc, c - dc).re;
            // r >= dc, c < dc: Y_{r-dc, c}
            const int rr = r - dc;
            if (rr > c) return ha.at(rr, c).im;
            if (rr == c) return LinExpr(0.0);
            LinExpr e = ha.at(c, rr).im;
            e *= -1.0;
            return e;
        };
        for (int c = 0; c < d; ++c)
            for (int r = c; r < d; ++r, ++row) {
                LinExpr e = entry(r, c);
                if (r != c) e *= std::numbers::sqrt2;
                add_expr_row(p.G, p.h, row, e, 1.0);
            }
    }
    if (lay.rows == 0)
        throw std::invalid_argument("conic solve: program has no conic constraints");

    for (const auto& [i, c] : prog.objective_.terms) p.c(i) -= c;  // maximize -> minimize

    // --- equilibration (power-of-two factors so values stay exact) ---
    RVector col_scale = RVector::Ones(p.n);
    for (int j = 0; j < p.n; ++j) {
        double mx = p.G.col(j).cwiseAbs().maxCoeff();
        if (p.A.rows() > 0) mx = std::max(mx, p.A.col(j).cwiseAbs().maxCoeff());
        if (mx > 0) col_scale(j) = std::ldexp(1.0, static_cast<int>(std::lround(std::log2(mx))));
        p.G.col(j) /= col_scale(j);
        if (p.A.rows() > 0) p.A.col(j) /= col_scale(j);
        p.c(j) /= col_scale(j);
    }
    auto block_scale = [&](int start, int len) {
        double mx = p.h.segment(start, len).cwiseAbs().maxCoeff();
        mx = std::max(mx, p.G.middleRows(start, len).cwiseAbs().maxCoeff());
        if (mx <= 0) return;
        const double f = std::ldexp(1.0, static_cast<int>(std::lround(std::log2(mx))));
        p.G.middleRows(start, len) /= f;
        p.h.segment(start, len) /= f;
    };
    for (int i = 0; i < lay.n_lin; ++i) block_scale(i, 1);
    for (size_t k = 0; k < lay.soc.size(); ++k)
        block_scale(lay.soc_start(static_cast<int>(k)), lay.soc[k]);
    for (size_t k = 0; k < lay.psd.size(); ++k)
        block_scale(lay.psd_start(static_cast<int>(k)), svec_len(lay.psd[k]));
    for (Eigen::Index i = 0; i < p.A.rows(); ++i) {
        double mx = std::max(p.A.row(i).cwiseAbs().maxCoeff(), std::abs(p.b(i)));
        if (mx <= 0) continue;
        const double f = std::ldexp(1.0, static_cast<int>(std::lround(std::log2(mx))));
        p.A.row(i) /= f;
        p.b(i) /= f;
    }

    IpmOutcome res = run_ipm(p, opts);

    SolveResult sr;
    sr.status = res.status;
    sr.iterations = res.iterations;
    sr.gap = res.gap;
    sr.primal_residual = res.pres;
    sr.dual_residual = res.dres;
    sr.x = RVector::Zero(p.n);
    if (res.x.size() == p.n) sr.x = res.x.cwiseQuotient(col_scale).eval();
    sr.objective = sr.value(prog.objective_);
    return sr;
}

SolveResult ConicProgram::solve(const SolveOptions& opts) const {
    return Lowering::solve(*this, opts);
}

}  // namespace d2dmsec::conic
