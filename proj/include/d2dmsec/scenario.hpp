#pragma once

#include <cstdint>
#include <random>

#include "d2dmsec/linalg.hpp"

namespace d2dmsec {

/// Dimensions, power budgets (linear, normalized to unit noise power) and
/// the objective weight. K/M/N/L follow the config-file key names: BS
/// antennas, D2D transmitters, D2D receivers, eavesdroppers.
struct SystemConfig {
    int K = 6;
    int M = 4;
    int N = 3;
    int L = 3;
    double p_max = 100.0;
    double p_b = 10000.0;
    double alpha = 0.5;
    double chi = 0.01;          // decode-blocking margin, nats
    double noise_power = 1.0;   // fixed; all powers are noise-normalized

    void validate() const;  // throws std::invalid_argument
};

double db_to_linear(double p_db);
double linear_to_db(double p_lin);

/// Substream identifiers for the per-group RNG split. Each group draws from
/// an independent generator seeded by substream_seed(seed, id), so changing
/// one population (say, adding eavesdroppers) does not perturb the others.
enum class Stream : std::uint32_t {
    d2d_to_rx = 0,
    d2d_to_eve = 1,
    d2d_to_cue = 2,
    bs_to_rx = 3,
    bs_to_eve = 4,
    bs_to_cue = 5,
    sca_init = 6,
    randomization = 7,
    oracle = 8,
};

std::uint64_t substream_seed(std::uint64_t base, Stream id);

/// mt19937_64 + explicit 53-bit uniforms + Box-Muller. The transform is
/// spelled out (instead of std::normal_distribution) so streams are
/// bit-identical across standard libraries.
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

    double uniform01();           // (0, 1)
    double normal();              // N(0, 1)
    Complex cnormal();            // CN(0, 1): re, im ~ N(0, 1/2)

  private:
    std::mt19937_64 gen_;
};

/// One quasi-static fading block. Columns are per-receiver / per-eavesdropper
/// channel vectors; entries are i.i.d. CN(0, 1).
struct ChannelRealization {
    CMatrix d2d_to_rx;    // M x N, column n = h_{D,n}
    CMatrix d2d_to_eve;   // M x L, column l = h_l
    CVector d2d_to_cue;   // M, h_C
    CMatrix bs_to_rx;     // K x N, column n = h_{B,n}
    CMatrix bs_to_eve;    // K x L, column l = h_{B,l}
    CVector bs_to_cue;    // K, h_BC
    std::uint64_t seed = 0;

    // derived channel matrices, assembled on demand
    const CMatrix& eve_matrix() const { return d2d_to_eve; }        // G_E (M x L)
    const CMatrix& bs_eve_matrix() const { return bs_to_eve; }      // G_B (K x L)
    CMatrix eve_cue_matrix() const;                                 // G_EC (M x (L+1))
    const CMatrix& bs_rx_matrix() const { return bs_to_rx; }        // G_BN (K x N)
    CMatrix bs_rx_eve_matrix() const;                               // G_BNE (K x (N+L))
    CMatrix bs_rx_cue_matrix() const;                               // G_BNC (K x (N+1))
};

ChannelRealization generate_channels(const SystemConfig& cfg, std::uint64_t seed);

}  // namespace d2dmsec
