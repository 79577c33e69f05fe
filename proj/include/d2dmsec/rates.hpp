#pragma once

#include <optional>
#include <string>
#include <vector>

#include "d2dmsec/scenario.hpp"

namespace d2dmsec {

/// Transmit-side design of one fading block: the VAA cooperative beamformer,
/// the BS beamformer and the artificial-noise covariance.
struct TxWeights {
    CVector w;     // M
    CVector w_b;   // K
    CMatrix q_an;  // K x K Hermitian PSD

    static TxWeights zero(const SystemConfig& cfg);
};

struct SolveDiagnostics {
    int iterations = 0;
    std::string status = "ok";
    bool converged = false;
    bool rank_one_w = true;
    bool rank_one_wb = true;
    bool prop1_single_tight_receiver = false;
    int subcase = 0;                        // worst case: 1 or 2
    int subopt_case = 0;                    // suboptimal: 1 or 2
    double surrogate_secrecy = 0.0;         // solver-side phi - beta
    double surrogate_cue = 0.0;             // solver-side R_C
    double relaxed_objective = 0.0;
    std::vector<double> objective_history;  // weighted objective per iteration
    int subproblem_constraints = 0;
    int subproblem_variables = 0;
};

struct BeamformingSolution {
    TxWeights tx;
    std::optional<CMatrix> w_relaxed;    // W from the lifted problem, if any
    std::optional<CMatrix> wb_relaxed;   // W_B
    double secrecy_rate = 0.0;           // nats/use, clamped at 0
    double cue_rate = 0.0;               // nats/use
    SolveDiagnostics diag;

    double weighted_objective(double alpha) const {
        return alpha * secrecy_rate + (1.0 - alpha) * cue_rate;
    }
};

enum class EveModel { independent, colluding };

struct RatePair {
    double secrecy_rate = 0.0;
    double cue_rate = 0.0;
    std::vector<double> rx_capacity;       // C_n per receiver
    std::vector<double> eve_capacity_sd;   // independent: C_l per eavesdropper;
                                           // colluding: single joint capacity
    std::vector<double> eve_capacity_sb;   // same layout for the decode-s_B side
};

namespace rates {

double capacity_receiver(const ChannelRealization& ch, const TxWeights& tx, int n);
double capacity_eaves_sd(const ChannelRealization& ch, const TxWeights& tx, int l);
double capacity_eaves_sb(const ChannelRealization& ch, const TxWeights& tx, int l);
double capacity_cue(const ChannelRealization& ch, const TxWeights& tx);

/// Joint capacity of colluding eavesdroppers overhearing the confidential
/// stream: log det(I + G_E^H w w^H G_E J^{-1}) with J the jamming-plus-noise
/// covariance seen across the eavesdropper array.
double capacity_eve_colluding(const ChannelRealization& ch, const TxWeights& tx);

/// Same with a general (possibly rank > 1) signal covariance in place of w w^H.
double capacity_eve_colluding_lifted(const ChannelRealization& ch, const CMatrix& w_lifted,
                                     const CVector& w_b, const CMatrix& q_an);

/// Colluding eavesdroppers attempting to decode the cellular stream.
double capacity_eve_decode_sb(const ChannelRealization& ch, const TxWeights& tx);

RatePair rate_pair(const ChannelRealization& ch, const TxWeights& tx, EveModel mode);

/// Power-budget check used by every scheme before a solution is emitted.
bool power_feasible(const SystemConfig& cfg, const TxWeights& tx,
                    double per_element_slack = 1e-7, double total_rel_slack = 1e-6);

}  // namespace rates
}  // namespace d2dmsec
