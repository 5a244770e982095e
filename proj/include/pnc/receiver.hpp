// receiver.hpp - relay receiver: pilot phase tracking, EM-BP and PNC mapping
//
// The relay knows both frequency responses H_A, H_B. Per OFDM symbol m it
// models R[m,i] = sum_u exp(j Theta_{u,m}) X_{u,m,i} H_{u,i} + W with W white
// Gaussian of variance sigma_w2 (noise plus CFO leakage). Phases start from a
// least-squares fit on each node's own pilots; EM-BP then alternates a
// virtual-channel BP decode at the current phases with a per-symbol M-step
// solved by particle shrinking over [0, 2pi)^2.

#pragma once

#include "pnc/codec.hpp"
#include "pnc/frame.hpp"
#include "pnc/ofdm.hpp"

#include <array>
#include <span>
#include <vector>

namespace pnc {

struct ChannelRealization;

/// Frequency responses the relay knows, one entry per DFT bin.
struct ChannelKnowledge {
    std::vector<cplx> h_a;
    std::vector<cplx> h_b;

    const std::vector<cplx>& h(Node u) const { return u == Node::a ? h_a : h_b; }
};

ChannelKnowledge known_channel(const ChannelRealization& chan);

/// Phase pairs per OFDM symbol, each wrapped to [0, 2pi).
struct PhaseEstimate {
    std::vector<std::array<double, 2>> theta;
    int iteration = 0;
    /// Symbols whose pilot correlation vanished and fell back to a neighbour.
    int pilot_fallbacks = 0;

    int m_symbols() const { return static_cast<int>(theta.size()); }
    double at(int m, Node u) const { return theta[static_cast<std::size_t>(m)][static_cast<std::size_t>(u)]; }
};

double wrap_phase(double theta);

/**
 * How particles move toward the weighted mean each round.
 *
 * `toward_mean`: theta <- (1 - eps) theta + eps mean, with the mean taken as
 * a plain weighted sum of angle values in [0, 2pi). The cloud keeps
 * (1 - eps)^P of its initial extent.
 *
 * `contract`: theta <- mean + eps * wrap(theta - mean), with the mean taken
 * in a chart centred on the best particle. The cloud shrinks by eps per
 * round and stays centred on the circle.
 */
enum class ShrinkRule { toward_mean, contract };

struct ParticleConfig {
    int rounds = 4;           // P
    int grid = 10;            // L, the grid holds L*L particles
    double forgetting = 0.1;  // epsilon
    /// Let the round-0 grid argmax compete in the final selection.
    bool keep_grid_argmax = true;
    ShrinkRule shrink = ShrinkRule::contract;

    void validate() const;
};

struct ReceiverConfig {
    double sigma_w2 = 0.1;
    int em_iters = 7;
    int bp_inner_iters = 20;
    ParticleConfig particle;
    PairMessages messages = PairMessages::joint;
    /// Correlate pilots against X* only, ignoring the known channel.
    bool literal_ls = false;

    void validate() const;
};

/**
 * sigma_n2 plus a small-CFO ICI term 2 (pi delta / 2)^2 / 3 * per_node_power,
 * floored at 1e-6 so the evidence kernel stays defined in the noiseless case.
 */
double default_sigma_w2(double sigma_n2, double delta, double per_node_power = 1.0);

/// Angle of sum_{i in P_u} conj(X_{u,m,i} H_{u,i}) R_{m,i}, per node and symbol.
PhaseEstimate ls_pilot_phase(const FreqFrame& frame, const ToneMap& tones, const ChannelKnowledge& channel,
                             bool literal = false);

/// Gaussian kernel exp(-|R - sum_u e^{j theta_u} X_u H_u|^2 / sigma_w2) per data tone, normalized per tone.
PairEvidence pair_evidence(const FreqFrame& frame, const ToneMap& tones, const ChannelKnowledge& channel,
                           const PhaseEstimate& phases, double sigma_w2, const Constellation& constellation);

/**
 * Expected log-likelihood of one OFDM symbol as a function of its phase pair,
 * up to the additive constant and the 1/sigma_w2 scale:
 *
 *   Q(tA, tB) = -sum_i sum_X p(X) |R_i - e^{j tA} X_A H_A,i - e^{j tB} X_B H_B,i|^2
 *
 * over data tones (weighted by the decoder's pair posteriors) and pilot tones
 * (known symbols). Expanding the square reduces it to three complex
 * correlations, so evaluation is O(1) per phase pair.
 */
class SymbolObjective {
public:
    SymbolObjective(std::span<const cplx> received, const ToneMap& tones, const ChannelKnowledge& channel,
                    const Constellation& constellation, std::span<const double> data_posteriors, int m);

    double operator()(double theta_a, double theta_b) const;
    double operator()(const std::array<double, 2>& theta) const { return (*this)(theta[0], theta[1]); }

private:
    void add(cplx r, cplx a, cplx b, double weight);

    double constant_ = 0.0;
    cplx corr_a_{};
    cplx corr_b_{};
    cplx cross_{};
};

/// Q for symbol m; `data_posteriors` holds N_d joint tables of size Q^2.
double q_function(const std::array<double, 2>& theta, std::span<const cplx> received, const ToneMap& tones,
                  const ChannelKnowledge& channel, const Constellation& constellation,
                  std::span<const double> data_posteriors, int m);

struct MStepResult {
    std::array<double, 2> theta{};
    bool fell_back = false;  // weights degenerate, previous estimate returned
};

/**
 * Particle M-step. Starts from the L x L grid (p 2pi/L, q 2pi/L), then for P
 * rounds weights the particles by exp((Q - max Q) / temperature), takes the
 * weighted mean of the angle values and moves every particle a fraction
 * epsilon toward it. Returns the best particle of the last round.
 */
MStepResult particle_m_step(const SymbolObjective& objective, const std::array<double, 2>& previous,
                            const ParticleConfig& config, double temperature);

/// Per-bit XOR MAP decision; ties go to 0.
Bits pnc_map(std::span<const PairBitTable> pair_bits);

struct EmBpSnapshot {
    PhaseEstimate phases;  // estimate E^(k)
    Bits xor_bits;         // decision from a BP decode at E^(k)
};

struct EmBpResult {
    PhaseEstimate phases;
    PairPosterior posterior;
    Bits xor_bits;
    /// snapshots[k] is what a run stopped at K = k would return; snapshots[0] is the baseline.
    std::vector<EmBpSnapshot> snapshots;
};

/// Everything the receiver needs besides the received samples.
struct ReceiverContext {
    const FrameConfig& frame;
    const ToneMap& tones;
    const Constellation& constellation;
    const RaCode& code;
};

EmBpResult em_bp_receive(const FreqFrame& frame, const ChannelKnowledge& channel, const ReceiverContext& ctx,
                         const ReceiverConfig& config);

/// Pilot-only receiver: LS phases and a single BP decode.
EmBpResult baseline_receive(const FreqFrame& frame, const ChannelKnowledge& channel, const ReceiverContext& ctx,
                            const ReceiverConfig& config);

}  // namespace pnc
