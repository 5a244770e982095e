#include "pnc/frame.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pnc {

std::string_view to_string(Modulation mod)
{
    return mod == Modulation::bpsk ? "bpsk" : "qpsk";
}

Modulation parse_modulation(std::string_view text)
{
    if (text == "bpsk" || text == "BPSK") return Modulation::bpsk;
    if (text == "qpsk" || text == "QPSK") return Modulation::qpsk;
    throw std::invalid_argument("unknown modulation '" + std::string(text) + "'");
}

Constellation::Constellation(Modulation mod)
    : mod_(mod)
{
    if (mod == Modulation::bpsk) {
        bits_per_symbol_ = 1;
        points_ = {cplx(1.0, 0.0), cplx(-1.0, 0.0)};
    } else {
        // Gray: first bit drives I, second bit drives Q.
        bits_per_symbol_ = 2;
        const double a = 1.0 / std::sqrt(2.0);
        points_ = {cplx(a, a), cplx(a, -a), cplx(-a, a), cplx(-a, -a)};
    }
}

int Constellation::slice(cplx sample) const
{
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int label = 0; label < size(); ++label) {
        const double d = std::norm(sample - point(label));
        if (d < best_d) {
            best_d = d;
            best = label;
        }
    }
    return best;
}

void FrameConfig::validate() const
{
    auto fail = [](const char* what) { throw std::invalid_argument(std::string("FrameConfig: ") + what); };
    if (n_fft <= 0 || n_cp < 0) fail("n_fft must be positive and n_cp non-negative");
    if (n_data + n_pilot + n_zero != n_fft) fail("n_data + n_pilot + n_zero must equal n_fft");
    if (n_cp >= n_fft) fail("n_cp must be smaller than n_fft");
    if (n_pilot % 2 != 0) fail("n_pilot must be even (split between two nodes)");
    if (m_symbols < 1) fail("m_symbols must be at least 1");
    if (em_outer_iters < 0) fail("em_outer_iters must be non-negative");
    if (bp_inner_iters < 1) fail("bp_inner_iters must be at least 1");
    if (code_rate_inv < 1 || coded_bits() % code_rate_inv != 0)
        fail("coded bits per frame must be a multiple of the repetition factor");
}

FrameConfig default_config(Modulation mod, int m_symbols, int em_iters)
{
    if (m_symbols < 1) throw std::invalid_argument("default_config: m_symbols must be at least 1");
    FrameConfig config;
    config.modulation = mod;
    config.m_symbols = m_symbols;
    config.em_outer_iters = em_iters;
    config.validate();
    return config;
}

cplx ToneMap::pilot_value(Node u, int /*m*/, int tone) const
{
    const auto& own = pilots(u);
    if (std::find(own.begin(), own.end(), tone) == own.end())
        throw std::out_of_range("pilot_value: tone is not a pilot of this node");
    return cplx(1.0, 0.0);
}

ToneMap make_tone_map(const FrameConfig& config)
{
    config.validate();
    if (config.n_fft != 64 || config.n_data != 48 || config.n_pilot != 4)
        throw std::invalid_argument("make_tone_map: only the 64-tone 802.11a layout is supported");

    const int n = config.n_fft;
    auto bin = [n](int logical) { return logical < 0 ? n + logical : logical; };

    ToneMap map;
    map.pilot_tones_a = {bin(-21), bin(-7)};
    map.pilot_tones_b = {bin(7), bin(21)};
    for (int k = -26; k <= 26; ++k) {
        if (k == 0 || k == -21 || k == -7 || k == 7 || k == 21) continue;
        map.data_tones.push_back(bin(k));
    }
    std::sort(map.data_tones.begin(), map.data_tones.end());
    map.zero_tones.push_back(0);
    for (int k = 27; k <= 31; ++k) map.zero_tones.push_back(k);
    for (int k = -32; k <= -27; ++k) map.zero_tones.push_back(bin(k));
    std::sort(map.zero_tones.begin(), map.zero_tones.end());
    return map;
}

std::vector<cplx> map_bits(std::span<const std::uint8_t> bits, const Constellation& constellation)
{
    const auto bps = static_cast<std::size_t>(constellation.bits_per_symbol());
    if (bits.size() % bps != 0)
        throw std::invalid_argument("map_bits: bit count is not a multiple of bits per symbol");

    std::vector<cplx> symbols;
    symbols.reserve(bits.size() / bps);
    for (std::size_t s = 0; s < bits.size(); s += bps) {
        int label = 0;
        for (std::size_t r = 0; r < bps; ++r) label = (label << 1) | (bits[s + r] & 1);
        symbols.push_back(constellation.point(label));
    }
    return symbols;
}

Bits demap(std::span<const cplx> symbols, const Constellation& constellation)
{
    const int bps = constellation.bits_per_symbol();
    Bits bits;
    bits.reserve(symbols.size() * static_cast<std::size_t>(bps));
    for (const cplx s : symbols) {
        const int label = constellation.slice(s);
        for (int r = bps - 1; r >= 0; --r) bits.push_back(static_cast<std::uint8_t>((label >> r) & 1));
    }
    return bits;
}

}  // namespace pnc
