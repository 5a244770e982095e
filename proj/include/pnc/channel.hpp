// channel.hpp - discrete-time two-way relay uplink
//
// Each node's samples pass through a sample-spaced tapped delay line, node B
// is additionally delayed by `relative_delay` samples, and each contribution
// is rotated by its residual CFO, exp(j 2 pi eps_u n / N), before white
// complex Gaussian noise is added at the relay.

#pragma once

#include "pnc/frame.hpp"

#include <array>
#include <random>
#include <span>
#include <vector>

namespace pnc {

using Rng = std::mt19937_64;

struct ChannelRealization {
    std::vector<cplx> taps_a{cplx(1.0, 0.0)};
    std::vector<cplx> taps_b{cplx(1.0, 0.0)};
    int relative_delay = 0;  // samples, node B after node A
    double cfo_a = 0.0;      // subcarrier spacings
    double cfo_b = 0.0;
    std::vector<cplx> h_freq_a;  // per DFT bin, filled by refresh_frequency_response()
    std::vector<cplx> h_freq_b;  // includes the exp(-j 2 pi i tau / N) delay ramp

    const std::vector<cplx>& h_freq(Node u) const { return u == Node::a ? h_freq_a : h_freq_b; }
    double cfo(Node u) const { return u == Node::a ? cfo_a : cfo_b; }

    /// Recompute h_freq_a/h_freq_b from taps and delay for an N-point DFT.
    void refresh_frequency_response(int n_fft);

    /// max{L_A - 1, tau + L_B - 1} <= N_cp
    bool delay_within_cp(int n_cp) const;
};

/**
 * Noise at the relay, as variance per complex time-domain sample. With the
 * unitary DFT this is also the per-tone frequency-domain variance.
 *
 * From Eb/N0 (linear):  sigma_n2 = (P * N / N_d) / (R_c * bits_per_symbol * Eb/N0)
 * where P = 1 is each node's received symbol energy per data tone.
 */
struct NoiseModel {
    double sigma_n2 = 0.0;

    static NoiseModel from_ebn0_db(double ebn0_db, const FrameConfig& config);
    static NoiseModel noiseless() { return {}; }
};

/// Single unit-power Rayleigh tap per node.
ChannelRealization sample_flat(Rng& rng, int n_fft = 64);

/// L Rayleigh taps per node with power profile exp(-c l), normalized to unit total power.
ChannelRealization sample_selective(int taps, double decay, Rng& rng, int n_fft = 64);

/// Normalized tap powers exp(-c l) / sum.
std::vector<double> power_delay_profile(int taps, double decay);

/// Uniform in [-0.5 delta, 0.5 delta].
double draw_cfo(double delta, Rng& rng);

/// Uniform over {0, ..., N_cp - L_B + 1}.
int draw_relative_delay(int n_cp, int taps_b, Rng& rng);

struct UplinkOptions {
    /// Simulate even if the delay spread exceeds the cyclic prefix.
    bool allow_cp_violation = false;
};

/**
 * Received relay samples for one frame pair. Both inputs are M * N_s samples
 * long and the output has the same length; node B's delayed tail past the
 * last symbol is dropped. Throws std::invalid_argument if the delay spread
 * does not fit in the cyclic prefix (unless overridden).
 */
std::vector<cplx> simulate_uplink(std::span<const cplx> frame_a, std::span<const cplx> frame_b,
                                  const ChannelRealization& chan, const NoiseModel& noise,
                                  const FrameConfig& config, Rng& rng, const UplinkOptions& options = {});

/// Per-symbol phase drift pairs, theta[m][u].
struct PhaseTrajectory {
    std::vector<std::array<double, 2>> theta;

    int m_symbols() const { return static_cast<int>(theta.size()); }
    double at(int m, Node u) const { return theta[static_cast<std::size_t>(m)][static_cast<std::size_t>(u)]; }
};

/**
 * Ground truth drift: the rotation at the midpoint of each symbol's DFT
 * window, Theta_{u,m} = 2 pi eps_u (m N_s + N_cp + (N-1)/2) / N. This is the
 * common phase the DFT sees on every tone of that symbol.
 */
PhaseTrajectory phase_trajectory(const ChannelRealization& chan, const FrameConfig& config);

}  // namespace pnc
