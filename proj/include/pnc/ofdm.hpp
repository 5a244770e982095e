// ofdm.hpp - CP-OFDM modulation and demodulation
//
// Both transforms are unitary (1/sqrt(N) on each side), so time-domain noise
// of variance s2 per sample shows up as variance s2 on every tone.

#pragma once

#include "pnc/frame.hpp"

#include <span>
#include <vector>

namespace pnc {

/// Row-major M x N grid of frequency-domain samples, one row per OFDM symbol.
class FreqFrame {
public:
    FreqFrame() = default;
    FreqFrame(int m_symbols, int n_fft)
        : m_symbols_(m_symbols), n_fft_(n_fft),
          data_(static_cast<std::size_t>(m_symbols) * static_cast<std::size_t>(n_fft))
    {}

    int m_symbols() const { return m_symbols_; }
    int n_fft() const { return n_fft_; }

    cplx& at(int m, int i) { return data_[index(m, i)]; }
    cplx at(int m, int i) const { return data_[index(m, i)]; }

    std::span<cplx> row(int m) { return {data_.data() + index(m, 0), static_cast<std::size_t>(n_fft_)}; }
    std::span<const cplx> row(int m) const
    {
        return {data_.data() + index(m, 0), static_cast<std::size_t>(n_fft_)};
    }

private:
    std::size_t index(int m, int i) const
    {
        return static_cast<std::size_t>(m) * static_cast<std::size_t>(n_fft_) + static_cast<std::size_t>(i);
    }

    int m_symbols_ = 0;
    int n_fft_ = 0;
    std::vector<cplx> data_;
};

/// Unitary forward DFT.
std::vector<cplx> dft(std::span<const cplx> x);
/// Unitary inverse DFT.
std::vector<cplx> idft(std::span<const cplx> x);

/**
 * Frequency-domain transmit grid of one node: coded symbols on the data
 * tones in (symbol, tone) order, the node's own pilots, and zeros on the
 * other node's pilots and on the guard tones.
 */
FreqFrame build_tx_grid(Node u, std::span<const cplx> data_symbols, const FrameConfig& config,
                        const ToneMap& tones);

/// IDFT each row and prepend the cyclic prefix. Output length M * N_s.
std::vector<cplx> modulate(const FreqFrame& grid, const FrameConfig& config);

/// Drop each cyclic prefix and DFT. Input length must be M * N_s.
FreqFrame demodulate(std::span<const cplx> samples, const FrameConfig& config);

}  // namespace pnc
