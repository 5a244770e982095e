// frame.hpp - OFDM numerology, tone allocation and constellations
//
// The layout follows 802.11a: 64 tones, DC and the outer band edges are
// nulled, data and pilots occupy logical tones -26..-1 and 1..26 with pilots
// at +-7 and +-21. The relay's two uplink users each own one half of the
// pilots and null the other half.

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace pnc {

using cplx = std::complex<double>;
using Bits = std::vector<std::uint8_t>;

enum class Modulation { bpsk, qpsk };

std::string_view to_string(Modulation mod);
Modulation parse_modulation(std::string_view text);

/// Uplink user: node A is the timing reference, node B may arrive later.
enum class Node : int { a = 0, b = 1 };

/**
 * Unit-energy constellation with an integer bit labeling.
 *
 * The label of a symbol packs its bits MSB first, so label 0b10 on QPSK
 * carries bits (1, 0). points()[label] is the constellation point.
 */
class Constellation {
public:
    explicit Constellation(Modulation mod);

    Modulation modulation() const { return mod_; }
    int bits_per_symbol() const { return bits_per_symbol_; }
    int size() const { return static_cast<int>(points_.size()); }
    std::span<const cplx> points() const { return points_; }
    cplx point(int label) const { return points_[static_cast<std::size_t>(label)]; }

    /// Nearest point, returned as label.
    int slice(cplx sample) const;

private:
    Modulation mod_;
    int bits_per_symbol_;
    std::vector<cplx> points_;
};

struct FrameConfig {
    int n_fft = 64;
    int n_cp = 16;
    int n_data = 48;
    int n_pilot = 4;
    int n_zero = 12;
    int m_symbols = 10;
    Modulation modulation = Modulation::qpsk;
    int code_rate_inv = 3;
    int bp_inner_iters = 20;
    int em_outer_iters = 7;

    int samples_per_symbol() const { return n_cp + n_fft; }
    int frame_samples() const { return m_symbols * samples_per_symbol(); }
    int bits_per_symbol() const { return modulation == Modulation::bpsk ? 1 : 2; }
    int coded_bits() const { return n_data * m_symbols * bits_per_symbol(); }
    int info_bits() const { return coded_bits() / code_rate_inv; }

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;
};

/// Default numerology: N=64, N_cp=16, N_d=48, N_p=4, N_z=12.
FrameConfig default_config(Modulation mod, int m_symbols, int em_iters);

/**
 * Physical tone assignment. Indices are DFT bins 0..N-1; logical tone k < 0
 * lives in bin N+k.
 */
struct ToneMap {
    std::vector<int> data_tones;
    std::vector<int> pilot_tones_a;
    std::vector<int> pilot_tones_b;
    std::vector<int> zero_tones;

    const std::vector<int>& pilots(Node u) const
    {
        return u == Node::a ? pilot_tones_a : pilot_tones_b;
    }

    /// Known symbol node u sends on one of its own pilot tones in symbol m.
    cplx pilot_value(Node u, int m, int tone) const;
};

ToneMap make_tone_map(const FrameConfig& config);

/// bits.size() must be a multiple of bits_per_symbol.
std::vector<cplx> map_bits(std::span<const std::uint8_t> bits, const Constellation& constellation);

/// Hard-decision demapping back to bits.
Bits demap(std::span<const cplx> symbols, const Constellation& constellation);

}  // namespace pnc
