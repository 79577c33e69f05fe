#include "d2dmsec/rates.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace d2dmsec {

TxWeights TxWeights::zero(const SystemConfig& cfg) {
    TxWeights tx;
    tx.w = CVector::Zero(cfg.M);
    tx.w_b = CVector::Zero(cfg.K);
    tx.q_an = CMatrix::Zero(cfg.K, cfg.K);
    return tx;
}

namespace rates {

namespace {

double abs2(const Complex& z) { return std::norm(z); }

double quad_form(const CVector& h, const CMatrix& q) {
    return std::real((h.adjoint() * q * h)(0, 0));  // Tr(h h^H Q)
}

// log det via Cholesky; matrices here are I + PSD, hence safely PD
double logdet(const CMatrix& a) {
    Eigen::LLT<CMatrix> llt(a);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("rates: interference matrix is not positive definite");
    double v = 0.0;
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        v += std::log(l(i, i).real());
    return 2.0 * v;
}

}  // namespace

double capacity_receiver(const ChannelRealization& ch, const TxWeights& tx, int n) {
    const CVector h_d = ch.d2d_to_rx.col(n);
    const CVector h_b = ch.bs_to_rx.col(n);
    const double signal = abs2(h_d.dot(tx.w));
    const double interf = abs2(h_b.dot(tx.w_b)) + quad_form(h_b, tx.q_an) + 1.0;
    return std::log1p(signal / interf);
}

double capacity_eaves_sd(const ChannelRealization& ch, const TxWeights& tx, int l) {
    const CVector h_e = ch.d2d_to_eve.col(l);
    const CVector h_b = ch.bs_to_eve.col(l);
    const double signal = abs2(h_e.dot(tx.w));
    const double interf = abs2(h_b.dot(tx.w_b)) + quad_form(h_b, tx.q_an) + 1.0;
    return std::log1p(signal / interf);
}

double capacity_eaves_sb(const ChannelRealization& ch, const TxWeights& tx, int l) {
    const CVector h_e = ch.d2d_to_eve.col(l);
    const CVector h_b = ch.bs_to_eve.col(l);
    const double signal = abs2(h_b.dot(tx.w_b));
    const double interf = abs2(h_e.dot(tx.w)) + quad_form(h_b, tx.q_an) + 1.0;
    return std::log1p(signal / interf);
}

double capacity_cue(const ChannelRealization& ch, const TxWeights& tx) {
    const double signal = abs2(ch.bs_to_cue.dot(tx.w_b));
    const double interf =
        abs2(ch.d2d_to_cue.dot(tx.w)) + quad_form(ch.bs_to_cue, tx.q_an) + 1.0;
    return std::log1p(signal / interf);
}

double capacity_eve_colluding(const ChannelRealization& ch, const TxWeights& tx) {
    const Eigen::Index l = ch.d2d_to_eve.cols();
    if (l == 0) return 0.0;
    const CMatrix& ge = ch.eve_matrix();
    const CMatrix& gb = ch.bs_eve_matrix();
    const CVector a = ge.adjoint() * tx.w;
    const CVector bv = gb.adjoint() * tx.w_b;
    CMatrix j = bv * bv.adjoint() + gb.adjoint() * tx.q_an * gb;
    j += CMatrix::Identity(l, l);
    return logdet(j + a * a.adjoint()) - logdet(j);
}

double capacity_eve_colluding_lifted(const ChannelRealization& ch, const CMatrix& w_lifted,
                                     const CVector& w_b, const CMatrix& q_an) {
    const Eigen::Index l = ch.d2d_to_eve.cols();
    if (l == 0) return 0.0;
    const CMatrix& ge = ch.eve_matrix();
    const CMatrix& gb = ch.bs_eve_matrix();
    const CVector bv = gb.adjoint() * w_b;
    CMatrix j = bv * bv.adjoint() + gb.adjoint() * q_an * gb;
    j += CMatrix::Identity(l, l);
    const CMatrix sig = ge.adjoint() * w_lifted * ge;
    return logdet(j + (sig + sig.adjoint()) * 0.5) - logdet(j);
}

double capacity_eve_decode_sb(const ChannelRealization& ch, const TxWeights& tx) {
    const Eigen::Index l = ch.d2d_to_eve.cols();
    if (l == 0) return 0.0;
    const CMatrix& ge = ch.eve_matrix();
    const CMatrix& gb = ch.bs_eve_matrix();
    const CVector a = ge.adjoint() * tx.w;
    const CVector bv = gb.adjoint() * tx.w_b;
    CMatrix j = a * a.adjoint() + gb.adjoint() * tx.q_an * gb;
    j += CMatrix::Identity(l, l);
    return logdet(j + bv * bv.adjoint()) - logdet(j);
}

RatePair rate_pair(const ChannelRealization& ch, const TxWeights& tx, EveModel mode) {
    RatePair rp;
    const int n_rx = static_cast<int>(ch.d2d_to_rx.cols());
    const int n_eve = static_cast<int>(ch.d2d_to_eve.cols());

    rp.rx_capacity.resize(n_rx);
    double min_rx = std::numeric_limits<double>::infinity();
    for (int n = 0; n < n_rx; ++n) {
        rp.rx_capacity[n] = capacity_receiver(ch, tx, n);
        min_rx = std::min(min_rx, rp.rx_capacity[n]);
    }

    double eve_sd = 0.0;
    if (mode == EveModel::independent) {
        rp.eve_capacity_sd.resize(n_eve);
        rp.eve_capacity_sb.resize(n_eve);
        for (int l = 0; l < n_eve; ++l) {
            rp.eve_capacity_sd[l] = capacity_eaves_sd(ch, tx, l);
            rp.eve_capacity_sb[l] = capacity_eaves_sb(ch, tx, l);
            eve_sd = std::max(eve_sd, rp.eve_capacity_sd[l]);
        }
    } else {
        eve_sd = capacity_eve_colluding(ch, tx);
        rp.eve_capacity_sd = {eve_sd};
        rp.eve_capacity_sb = {capacity_eve_decode_sb(ch, tx)};
    }

    rp.secrecy_rate = std::max(0.0, min_rx - eve_sd);
    rp.cue_rate = capacity_cue(ch, tx);
    return rp;
}

bool power_feasible(const SystemConfig& cfg, const TxWeights& tx,
                    double per_element_slack, double total_rel_slack) {
    const double per = cfg.p_max / cfg.M;
    for (int m = 0; m < cfg.M; ++m)
        if (std::norm(tx.w(m)) > per + per_element_slack) return false;
    const double bs_power = tx.w_b.squaredNorm() + tx.q_an.trace().real();
    return bs_power <= cfg.p_b * (1.0 + total_rel_slack);
}

}  // namespace rates
}  // namespace d2dmsec
