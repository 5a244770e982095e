// codec.hpp - repeat-accumulate code and the PNC "virtual channel" decoder
//
// Both nodes use the same regular RA code: every info bit is repeated three
// times, the repeated stream goes through a fixed interleaver shared by the
// nodes, and the accumulator c[t] = c[t-1] ^ d[t] (c[-1] = 0) produces the
// transmitted bits.
//
// The relay sees the superposition of both codewords. Since the code is
// linear and common to both nodes, the pair (cA[t], cB[t]) obeys the same
// parity structure component-wise over Z2 x Z2, so the decoder runs
// sum-product on one Tanner graph whose variables are bit pairs. Each data
// tone contributes a joint-evidence factor over the pair of transmitted
// symbols.

#pragma once

#include "pnc/frame.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace pnc {

struct RaCode {
    int k_info = 0;
    int repeat = 3;
    std::uint64_t interleaver_seed = 0;
    /// d[t] = repeated[interleaver[t]], repeated[s] = info[s / repeat].
    std::vector<int> interleaver;

    int n_coded() const { return k_info * repeat; }
};

/// Uniformly random interleaver drawn from the seed.
RaCode make_ra_code(int k_info, std::uint64_t interleaver_seed, int repeat = 3);

Bits ra_encode(std::span<const std::uint8_t> info_bits, const RaCode& code);

/// Probability table over a pair of bits, indexed 2*bA + bB (00, 01, 10, 11).
using PairBitTable = std::array<double, 4>;

/**
 * Channel evidence p(R | X_A, X_B) per data tone over the joint alphabet.
 * Entry labelA * Q + labelB, Q = constellation size. Tones are ordered
 * (symbol m, data tone d) and carry coded bits [t*bps, (t+1)*bps) of each node.
 */
class PairEvidence {
public:
    PairEvidence() = default;
    PairEvidence(int n_tones, int constellation_size);

    int n_tones() const { return n_tones_; }
    int constellation_size() const { return q_; }
    int alphabet() const { return q_ * q_; }

    std::span<double> tone(int t);
    std::span<const double> tone(int t) const;

private:
    int n_tones_ = 0;
    int q_ = 0;
    std::vector<double> table_;
};

/// Decoder output: per-tone joint symbol posteriors and per-info-bit pair posteriors.
struct PairPosterior {
    int constellation_size = 0;
    std::vector<double> symbol_table;  // n_tones * Q^2
    std::vector<PairBitTable> info_bits;

    int alphabet() const { return constellation_size * constellation_size; }
    int n_tones() const { return alphabet() == 0 ? 0 : static_cast<int>(symbol_table.size()) / alphabet(); }
    std::span<const double> symbol(int t) const
    {
        return {symbol_table.data() + static_cast<std::ptrdiff_t>(t) * alphabet(), static_cast<std::size_t>(alphabet())};
    }
};

/**
 * How messages cross the parity checks. `joint` keeps full four-entry pair
 * messages. `factorized` projects every message entering a check onto the
 * product of its per-node marginals, which reduces the checks to two
 * independent binary decoders coupled only through the channel factors.
 */
enum class PairMessages { joint, factorized };

struct BpOptions {
    int iterations = 20;
    PairMessages messages = PairMessages::joint;
};

/**
 * Flooding sum-product decoder over pair variables. One instance decodes one
 * frame; iterate() runs a full evidence -> variable -> check -> variable pass.
 *
 * Messages are kept as probability vectors normalized to unit sum with every
 * entry floored at kMessageFloor, so no product of incoming messages can
 * underflow to an all-zero table.
 */
class VirtualDecoder {
public:
    static constexpr double kMessageFloor = 1e-60;

    /// Throws std::invalid_argument on size mismatch and std::domain_error
    /// if any evidence table is all zero or non-finite.
    VirtualDecoder(const PairEvidence& evidence, const RaCode& code, int bits_per_symbol,
                   PairMessages messages = PairMessages::joint);

    void iterate();
    int iterations_done() const { return iterations_; }

    PairPosterior posterior() const;

private:
    using Msg = std::array<double, 4>;

    void update_channel_messages();
    void update_checks();
    Msg extrinsic_from_code(int t) const;

    const PairEvidence& evidence_;
    const RaCode& code_;
    int bps_;
    PairMessages mode_;
    int n_;
    int iterations_ = 0;

    std::vector<int> combo_to_entry_;  // bit-pair combination of a tone -> evidence entry
    std::vector<int> info_edges_;  // edges of info bit j at [j*repeat, (j+1)*repeat)

    std::vector<Msg> channel_;     // tone factor -> y[t]
    std::vector<Msg> check_self_;  // check t -> y[t]
    std::vector<Msg> check_prev_;  // check t -> y[t-1]
    std::vector<Msg> check_info_;  // check t -> info variable on edge t
};

PairPosterior bp_decode(const PairEvidence& evidence, const RaCode& code, int bits_per_symbol,
                        const BpOptions& options = {});

}  // namespace pnc
