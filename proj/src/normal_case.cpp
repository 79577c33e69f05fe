#include "d2dmsec/normal_case.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <numbers>

namespace d2dmsec {

using conic::ConicProgram;
using conic::LinExpr;
using conic::VarRef;

namespace {

// Taylor lower bound of the quadratic-over-linear term b^2/c around (b0, c0):
// 2 (b0/c0) b - (b0/c0)^2 c
LinExpr ratio_taylor(double b0, double c0, int b, int c) {
    const double r = b0 / c0;
    return 2.0 * r * LinExpr::term(b, 1.0) - r * r * LinExpr::term(c, 1.0);
}

// Taylor lower bound of |h^H v|^2 around v0 for a complex variable block:
// 2 Re(v0^H H v) - v0^H H v0 with H = h h^H
LinExpr quad_taylor(const ConicProgram& p, const CVector& h, const CVector& v0,
                    const VarRef& v) {
    const Complex inner0 = h.dot(v0);  // h^H v0
    // v0^H H v = (h^H v0)^* (h^H v)
    conic::ComplexExpr hv = p.inner(h, v);
    LinExpr re = std::conj(inner0).real() * hv.re - std::conj(inner0).imag() * hv.im;
    return 2.0 * re - LinExpr(std::norm(inner0));
}

// tangent of log(1 + e) at e0 (an upper bound, by concavity)
LinExpr log_tangent(double e0, int e) {
    return LinExpr(std::log1p(e0) - e0 / (1.0 + e0)) + (1.0 / (1.0 + e0)) * LinExpr::term(e, 1.0);
}

}  // namespace

NormalSubproblem build_subproblem(const ChannelRealization& ch, const SystemConfig& cfg,
                                  const ScaState& state, const ScaOptions& opts) {
    NormalSubproblem sp;
    ConicProgram& p = sp.program;
    const int u_terms = opts.exp_cone_terms;
    sp.has_eve = cfg.L >= 1;
    sp.has_an = opts.an_enabled;

    sp.w = p.add_complex_vector(cfg.M, "w");
    sp.w_b = p.add_complex_vector(cfg.K, "wB");
    if (sp.has_an) sp.q_an = p.add_hermitian(cfg.K, "Q");

    sp.phi = p.add_scalar("phi");
    sp.r_c = p.add_scalar("Rc");
    sp.a = p.add_scalar("a");
    sp.b = p.add_scalar("b");
    sp.c = p.add_scalar("c");
    sp.d = p.add_scalar("d");
    sp.a4 = p.add_scalar("a4");
    sp.b4 = p.add_scalar("b4");
    sp.c4 = p.add_scalar("c4");
    sp.d4 = p.add_scalar("d4");
    if (sp.has_eve) {
        sp.beta = p.add_scalar("beta");
        sp.e = p.add_scalar("e");
        sp.f = p.add_scalar("f");
        sp.e5 = p.add_scalar("e5");
        sp.f5 = p.add_scalar("f5");
    }

    auto wb_expr = [&](const CVector& h) { return p.inner(h, sp.w_b); };
    auto w_expr = [&](const CVector& h) { return p.inner(h, sp.w); };
    auto an_trace = [&](const CVector& h) -> LinExpr {
        if (!sp.has_an) return LinExpr(0.0);
        return p.trace_product(h * h.adjoint(), sp.q_an);
    };

    int& sigma = sp.sigma_estimate;

    // C1: per-element transmit power of the VAA
    const double per_elem = std::sqrt(cfg.p_max / cfg.M);
    for (int m = 0; m < cfg.M; ++m) {
        p.add_soc(LinExpr(per_elem),
                  {LinExpr::term(sp.w.offset + m, 1.0),
                   LinExpr::term(sp.w.offset + cfg.M + m, 1.0)},
                  "C1[" + std::to_string(m) + "]");
    }
    // C2: BS power, jointly over the beamformer and the AN covariance
    {
        std::vector<LinExpr> vec;
        LinExpr budget(cfg.p_b);
        if (sp.has_an) budget -= p.trace(sp.q_an);
        vec.push_back(0.5 * (budget - 1.0));
        for (int i = 0; i < 2 * cfg.K; ++i)
            vec.push_back(LinExpr::term(sp.w_b.offset + i, 1.0));
        p.add_soc(0.5 * (budget + 1.0), std::move(vec), "C2");
        if (sp.has_an) p.add_psd(sp.q_an, "Q_psd");
    }

    // --- receiver block: phi <= min_n C_n ---
    p.add_exp_upper(LinExpr::term(sp.a, 1.0), LinExpr::term(sp.phi, 1.0), u_terms, "C8");
    sigma += u_terms + 5;
    p.add_ineq(ratio_taylor(state.b0, state.c0, sp.b, sp.c) - LinExpr::term(sp.a, 1.0), "C9");
    sigma += 1;
    p.add_soc(0.5 * (LinExpr::term(sp.d, 1.0) + 1.0),
              {LinExpr::term(sp.b, 1.0), 0.5 * (LinExpr::term(sp.d, 1.0) - 1.0)}, "C10");
    sigma += 1;
    for (int n = 0; n < cfg.N; ++n) {
        p.add_ineq(quad_taylor(p, ch.d2d_to_rx.col(n), state.w0, sp.w) -
                       LinExpr::term(sp.d, 1.0),
                   "C11[" + std::to_string(n) + "]");
        sigma += 1;
        const CVector h_b = ch.bs_to_rx.col(n);
        LinExpr margin = LinExpr::term(sp.c, 1.0) - an_trace(h_b);
        auto hb_wb = wb_expr(h_b);
        p.add_soc(0.5 * margin,
                  {hb_wb.re, hb_wb.im, 0.5 * (margin - 2.0)},
                  "C12[" + std::to_string(n) + "]");
        if (n == 0) sigma += 1;  // the size estimate books this bound once
    }

    // --- eavesdropper block: beta >= max_l C_l ---
    if (sp.has_eve) {
        p.add_ineq(LinExpr::term(sp.beta, 1.0) - log_tangent(state.e0, sp.e), "C13");
        sigma += 1;
        for (int l = 0; l < cfg.L; ++l) {
            auto hl_w = w_expr(ch.d2d_to_eve.col(l));
            p.add_soc(0.5 * (LinExpr::term(sp.e, 1.0) + LinExpr::term(sp.f, 1.0)),
                      {0.5 * (LinExpr::term(sp.e, 1.0) - LinExpr::term(sp.f, 1.0)), hl_w.re,
                       hl_w.im},
                      "C14[" + std::to_string(l) + "]");
            sigma += 1;
            const CVector h_bl = ch.bs_to_eve.col(l);
            p.add_ineq(quad_taylor(p, h_bl, state.wb0, sp.w_b) + an_trace(h_bl) + 1.0 -
                           LinExpr::term(sp.f, 1.0),
                       "C15[" + std::to_string(l) + "]");
            sigma += 1;
        }
    }

    // --- CUE-rate block, mirroring the receiver chain onto R_C ---
    p.add_exp_upper(LinExpr::term(sp.a4, 1.0), LinExpr::term(sp.r_c, 1.0), u_terms, "C16");
    sigma += u_terms + 5;
    p.add_ineq(ratio_taylor(state.b4_0, state.c4_0, sp.b4, sp.c4) - LinExpr::term(sp.a4, 1.0),
               "C17");
    sigma += 1;
    p.add_soc(0.5 * (LinExpr::term(sp.d4, 1.0) + 1.0),
              {LinExpr::term(sp.b4, 1.0), 0.5 * (LinExpr::term(sp.d4, 1.0) - 1.0)}, "C18");
    sigma += 1;
    p.add_ineq(quad_taylor(p, ch.bs_to_cue, state.wb0, sp.w_b) - LinExpr::term(sp.d4, 1.0),
               "C19");
    sigma += 1;
    {
        LinExpr margin = LinExpr::term(sp.c4, 1.0) - an_trace(ch.bs_to_cue);
        auto hc_w = w_expr(ch.d2d_to_cue);
        p.add_soc(0.5 * margin, {hc_w.re, hc_w.im, 0.5 * (margin - 2.0)}, "C20");
        sigma += 1;
    }

    // --- decode-blocking block, mirroring the eavesdropper chain onto R_C - chi ---
    if (sp.has_eve) {
        p.add_ineq(LinExpr::term(sp.r_c, 1.0) - cfg.chi - log_tangent(state.e5_0, sp.e5),
                   "C21");
        sigma += 1;
        for (int l = 0; l < cfg.L; ++l) {
            auto hbl_wb = wb_expr(ch.bs_to_eve.col(l));
            p.add_soc(0.5 * (LinExpr::term(sp.e5, 1.0) + LinExpr::term(sp.f5, 1.0)),
                      {0.5 * (LinExpr::term(sp.e5, 1.0) - LinExpr::term(sp.f5, 1.0)),
                       hbl_wb.re, hbl_wb.im},
                      "C22[" + std::to_string(l) + "]");
            sigma += 1;
            const CVector h_l = ch.d2d_to_eve.col(l);
            p.add_ineq(quad_taylor(p, h_l, state.w0, sp.w) + an_trace(ch.bs_to_eve.col(l)) +
                           1.0 - LinExpr::term(sp.f5, 1.0),
                       "C23[" + std::to_string(l) + "]");
            sigma += 1;
        }
    }

    LinExpr obj = cfg.alpha * LinExpr::term(sp.phi, 1.0) +
                  (1.0 - cfg.alpha) * LinExpr::term(sp.r_c, 1.0);
    if (sp.has_eve) obj -= cfg.alpha * LinExpr::term(sp.beta, 1.0);
    p.set_objective_maximize(obj);

    sp.total_constraints = p.num_constraints();
    return sp;
}

ScaState initial_state(const ChannelRealization& ch, const SystemConfig& cfg,
                       const ScaOptions& opts, int retry) {
    (void)opts;
    ScaState st;
    const std::uint64_t base =
        ch.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(retry);
    GaussianStream g(substream_seed(base, Stream::sca_init));

    st.w0.resize(cfg.M);
    const double amp = std::sqrt(cfg.p_max / cfg.M);
    for (int m = 0; m < cfg.M; ++m) {
        const double theta = 2.0 * std::numbers::pi * g.uniform01();
        st.w0(m) = amp * Complex(std::cos(theta), std::sin(theta));
    }
    st.wb0 = std::sqrt(cfg.p_b) * ch.bs_to_cue.normalized();

    double c0 = 1.0, d0 = std::numeric_limits<double>::infinity();
    for (int n = 0; n < cfg.N; ++n) {
        c0 = std::max(c0, std::norm(ch.bs_to_rx.col(n).dot(st.wb0)) + 1.0);
        d0 = std::min(d0, std::norm(ch.d2d_to_rx.col(n).dot(st.w0)));
    }
    st.c0 = c0;
    st.b0 = std::max(1e-6, std::sqrt(d0));

    st.c4_0 = std::norm(ch.d2d_to_cue.dot(st.w0)) + 1.0;
    st.b4_0 = std::max(1e-6, std::abs(ch.bs_to_cue.dot(st.wb0)));

    if (cfg.L >= 1) {
        double fmin = std::numeric_limits<double>::infinity();
        double f5min = std::numeric_limits<double>::infinity();
        double num = 0.0, num5 = 0.0;
        for (int l = 0; l < cfg.L; ++l) {
            fmin = std::min(fmin, std::norm(ch.bs_to_eve.col(l).dot(st.wb0)) + 1.0);
            f5min = std::min(f5min, std::norm(ch.d2d_to_eve.col(l).dot(st.w0)) + 1.0);
            num = std::max(num, std::norm(ch.d2d_to_eve.col(l).dot(st.w0)));
            num5 = std::max(num5, std::norm(ch.bs_to_eve.col(l).dot(st.wb0)));
        }
        st.e0 = num / fmin;
        st.e5_0 = num5 / f5min;
    }
    return st;
}

namespace {

void clamp_power(const SystemConfig& cfg, TxWeights& tx) {
    const double per = cfg.p_max / cfg.M;
    for (int m = 0; m < cfg.M; ++m) {
        const double p2 = std::norm(tx.w(m));
        if (p2 > per) tx.w(m) *= std::sqrt(per / p2);
    }
    const double bs = tx.w_b.squaredNorm() + std::max(0.0, tx.q_an.trace().real());
    if (bs > cfg.p_b) {
        const double f = cfg.p_b / bs;
        tx.w_b *= std::sqrt(f);
        tx.q_an *= f;
    }
}

// strip the tiny negative eigenvalues a finite-precision SDP solve leaves
CMatrix psd_project(const CMatrix& q) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es((q + q.adjoint()) * 0.5);
    RVector ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

BeamformingSolution solve_normal(const ChannelRealization& ch, const SystemConfig& cfg,
                                 const ScaOptions& opts) {
    cfg.validate();
    BeamformingSolution sol;
    sol.tx = TxWeights::zero(cfg);

    conic::SolveOptions sopts;
    sopts.tol = opts.solver_tol;

    ScaState st;
    bool started = false;
    int retry = 0;
    for (; retry <= opts.init_retries && !started; ++retry) {
        st = initial_state(ch, cfg, opts, retry);
        NormalSubproblem sp = build_subproblem(ch, cfg, st, opts);
        auto r = sp.program.solve(sopts);
        if (r.status == conic::SolveStatus::optimal) {
            started = true;
            st.objective_history.push_back(r.objective);
            st.w0 = r.complex_vector(sp.w);
            st.wb0 = r.complex_vector(sp.w_b);
            st.b0 = std::max(1e-6, r.value(sp.b));
            st.c0 = std::max(1.0, r.value(sp.c));
            st.b4_0 = std::max(1e-6, r.value(sp.b4));
            st.c4_0 = std::max(1.0, r.value(sp.c4));
            if (sp.has_eve) {
                st.e0 = std::max(0.0, r.value(sp.e));
                st.e5_0 = std::max(0.0, r.value(sp.e5));
            }
            sol.tx.w = st.w0;
            sol.tx.w_b = st.wb0;
            if (sp.has_an) sol.tx.q_an = psd_project(r.hermitian(sp.q_an));
            sol.diag.surrogate_secrecy =
                sp.has_eve ? r.value(sp.phi) - r.value(sp.beta) : r.value(sp.phi);
            sol.diag.surrogate_cue = r.value(sp.r_c);
            sol.diag.subproblem_constraints = sp.sigma_estimate;
            sol.diag.subproblem_variables = sp.program.num_variables();
        }
    }
    if (!started) {
        sol.diag.status = "infeasible-after-retries";
        return sol;
    }
    sol.diag.iterations = 1;

    for (int j = 2; j <= opts.j_max; ++j) {
        const CVector w_prev = st.w0, wb_prev = st.wb0;
        NormalSubproblem sp = build_subproblem(ch, cfg, st, opts);
        auto r = sp.program.solve(sopts);
        if (r.status != conic::SolveStatus::optimal) {
            sol.diag.status = std::string("solver-") + conic::to_string(r.status);
            break;
        }
        st.objective_history.push_back(r.objective);
        st.w0 = r.complex_vector(sp.w);
        st.wb0 = r.complex_vector(sp.w_b);
        st.b0 = std::max(1e-6, r.value(sp.b));
        st.c0 = std::max(1.0, r.value(sp.c));
        st.b4_0 = std::max(1e-6, r.value(sp.b4));
        st.c4_0 = std::max(1.0, r.value(sp.c4));
        if (sp.has_eve) {
            st.e0 = std::max(0.0, r.value(sp.e));
            st.e5_0 = std::max(0.0, r.value(sp.e5));
        }
        sol.tx.w = st.w0;
        sol.tx.w_b = st.wb0;
        if (sp.has_an) sol.tx.q_an = psd_project(r.hermitian(sp.q_an));
        sol.diag.surrogate_secrecy =
            sp.has_eve ? r.value(sp.phi) - r.value(sp.beta) : r.value(sp.phi);
        sol.diag.surrogate_cue = r.value(sp.r_c);
        sol.diag.iterations = j;

        const double delta = (st.w0 - w_prev).norm() + (st.wb0 - wb_prev).norm();
        if (opts.verbose)
            std::cerr << "sca iter " << j << " obj " << r.objective << " delta " << delta
                      << "\n";
        if (delta <= opts.psi) {
            sol.diag.converged = true;
            break;
        }
    }

    clamp_power(cfg, sol.tx);
    sol.diag.objective_history = st.objective_history;

    // claimed rates: the secrecy surrogate from the final subproblem, the CUE
    // rate re-evaluated exactly; with a degenerate weight the unweighted side
    // carries no solver pressure and is reported from direct evaluation too
    const RatePair exact = rates::rate_pair(ch, sol.tx, EveModel::independent);
    sol.cue_rate = exact.cue_rate;
    if (cfg.alpha > 0.0)
        sol.secrecy_rate = std::max(0.0, sol.diag.surrogate_secrecy);
    else
        sol.secrecy_rate = exact.secrecy_rate;
    return sol;
}

}  // namespace d2dmsec
