#include "d2dmsec/scenario.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace d2dmsec {

void SystemConfig::validate() const {
    if (K < 1 || M < 1 || N < 1) throw std::invalid_argument("config: K, M, N must be >= 1");
    if (L < 0) throw std::invalid_argument("config: L must be >= 0");
    if (!(p_max > 0.0) || !(p_b > 0.0)) throw std::invalid_argument("config: power budgets must be positive");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("config: alpha must lie in [0, 1]");
    if (!(chi > 0.0)) throw std::invalid_argument("config: chi must be positive");
    if (noise_power != 1.0) throw std::invalid_argument("config: noise power is fixed to 1");
}

double db_to_linear(double p_db) { return std::pow(10.0, p_db / 10.0); }
double linear_to_db(double p_lin) { return 10.0 * std::log10(p_lin); }

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t base, Stream id) {
    // two mixing rounds keep adjacent base seeds decorrelated
    return splitmix64(splitmix64(base) + static_cast<std::uint64_t>(id) + 1);
}

double GaussianStream::uniform01() {
    // top 53 bits, shifted into (0, 1); never returns 0 so log() is safe
    const std::uint64_t r = gen_();
    return (static_cast<double>(r >> 11) + 0.5) * 0x1.0p-53;
}

double GaussianStream::normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Complex GaussianStream::cnormal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-std::log(u1));  // Box-Muller pair scaled by 1/sqrt(2)
    return {r * std::cos(2.0 * std::numbers::pi * u2),
            r * std::sin(2.0 * std::numbers::pi * u2)};
}

namespace {

CMatrix draw_matrix(int rows, int cols, std::uint64_t seed) {
    GaussianStream g(seed);
    CMatrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
            m(i, j) = g.cnormal();
    return m;
}

}  // namespace

ChannelRealization generate_channels(const SystemConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    ChannelRealization ch;
    ch.seed = seed;
    ch.d2d_to_rx = draw_matrix(cfg.M, cfg.N, substream_seed(seed, Stream::d2d_to_rx));
    ch.d2d_to_eve = draw_matrix(cfg.M, cfg.L, substream_seed(seed, Stream::d2d_to_eve));
    ch.d2d_to_cue = draw_matrix(cfg.M, 1, substream_seed(seed, Stream::d2d_to_cue));
    ch.bs_to_rx = draw_matrix(cfg.K, cfg.N, substream_seed(seed, Stream::bs_to_rx));
    ch.bs_to_eve = draw_matrix(cfg.K, cfg.L, substream_seed(seed, Stream::bs_to_eve));
    ch.bs_to_cue = draw_matrix(cfg.K, 1, substream_seed(seed, Stream::bs_to_cue));
    return ch;
}

CMatrix ChannelRealization::eve_cue_matrix() const {
    CMatrix g(d2d_to_eve.rows(), d2d_to_eve.cols() + 1);
    g.leftCols(d2d_to_eve.cols()) = d2d_to_eve;
    g.rightCols(1) = d2d_to_cue;
    return g;
}

CMatrix ChannelRealization::bs_rx_eve_matrix() const {
    CMatrix g(bs_to_rx.rows(), bs_to_rx.cols() + bs_to_eve.cols());
    g.leftCols(bs_to_rx.cols()) = bs_to_rx;
    g.rightCols(bs_to_eve.cols()) = bs_to_eve;
    return g;
}

CMatrix ChannelRealization::bs_rx_cue_matrix() const {
    CMatrix g(bs_to_rx.rows(), bs_to_rx.cols() + 1);
    g.leftCols(bs_to_rx.cols()) = bs_to_rx;
    g.rightCols(1) = bs_to_cue;
    return g;
}

}  // namespace d2dmsec
