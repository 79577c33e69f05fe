#pragma once

#include "d2dmsec/conic.hpp"
#include "d2dmsec/rates.hpp"

namespace d2dmsec {

struct ScaOptions {
    double psi = 1e-3;        // stop when ||dw|| + ||dw_B|| falls below this
    int j_max = 20;
    int exp_cone_terms = 6;   // U in the e^phi relaxation
    int init_retries = 5;
    bool an_enabled = true;   // keep the AN covariance as a variable
    double solver_tol = 1e-8;
    bool verbose = false;
};

/// Linearization points of one convex inner approximation. Every point is
/// carried over from the previous iterate, keeping each subproblem feasible
/// at the incumbent.
struct ScaState {
    CVector w0;    // M
    CVector wb0;   // K
    // receiver-side block (min-capacity chain)
    double b0 = 0, c0 = 1;
    // eavesdropper-side block (max-capacity chain)
    double e0 = 0;
    // CUE-rate block
    double b4_0 = 0, c4_0 = 1;
    // decode-blocking block
    double e5_0 = 0;
    int iteration = 0;
    std::vector<double> objective_history;
};

struct NormalSubproblem {
    conic::ConicProgram program;
    conic::VarRef w, w_b;
    conic::VarRef q_an;  // valid only when an_enabled
    int phi = -1, beta = -1, r_c = -1;
    int a = -1, b = -1, c = -1, d = -1, e = -1, f = -1;
    int a4 = -1, b4 = -1, c4 = -1, d4 = -1;
    int e5 = -1, f5 = -1;
    bool has_eve = false;
    bool has_an = false;
    // constraint bookkeeping: the documented tally counts the transformed
    // rate constraints (power constraints excluded, per-receiver denominator
    // bounds counted once)
    int sigma_estimate = 0;
    int total_constraints = 0;
};

/// Convex inner approximation of the weighted-rate problem around `state`.
NormalSubproblem build_subproblem(const ChannelRealization& ch, const SystemConfig& cfg,
                                  const ScaState& state, const ScaOptions& opts);

ScaState initial_state(const ChannelRealization& ch, const SystemConfig& cfg,
                       const ScaOptions& opts, int retry = 0);

/// Algorithm: iterate convex subproblems until the beamformers settle.
BeamformingSolution solve_normal(const ChannelRealization& ch, const SystemConfig& cfg,
                                 const ScaOptions& opts = {});

}  // namespace d2dmsec
