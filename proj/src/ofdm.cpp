#include "pnc/ofdm.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pnc {
namespace {

std::vector<cplx> transform(std::span<const cplx> x, double sign)
{
    const std::size_t n = x.size();
    // exp(sign * j 2 pi k / n) for k = 0..n-1; (i*k) mod n indexes it.
    std::vector<cplx> twiddle(n);
    for (std::size_t k = 0; k < n; ++k)
        twiddle[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n));

    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<cplx> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{};
        for (std::size_t i = 0; i < n; ++i) acc += x[i] * twiddle[(i * k) % n];
        out[k] = acc * scale;
    }
    return out;
}

}  // namespace

std::vector<cplx> dft(std::span<const cplx> x) { return transform(x, -1.0); }

std::vector<cplx> idft(std::span<const cplx> x) { return transform(x, +1.0); }

FreqFrame build_tx_grid(Node u, std::span<const cplx> data_symbols, const FrameConfig& config,
                        const ToneMap& tones)
{
    const auto per_symbol = tones.data_tones.size();
    if (data_symbols.size() != per_symbol * static_cast<std::size_t>(config.m_symbols))
        throw std::invalid_argument("build_tx_grid: data symbol count does not fill the frame");

    FreqFrame grid(config.m_symbols, config.n_fft);
    std::size_t s = 0;
    for (int m = 0; m < config.m_symbols; ++m) {
        for (const int tone : tones.data_tones) grid.at(m, tone) = data_symbols[s++];
        for (const int tone : tones.pilots(u)) grid.at(m, tone) = tones.pilot_value(u, m, tone);
    }
    return grid;
}

std::vector<cplx> modulate(const FreqFrame& grid, const FrameConfig& config)
{
    const int n = config.n_fft;
    const int ns = config.samples_per_symbol();
    std::vector<cplx> out(static_cast<std::size_t>(grid.m_symbols() * ns));
    for (int m = 0; m < grid.m_symbols(); ++m) {
        const auto body = idft(grid.row(m));
        auto* dst = out.data() + static_cast<std::ptrdiff_t>(m) * ns;
        for (int i = 0; i < config.n_cp; ++i) dst[i] = body[static_cast<std::size_t>(n - config.n_cp + i)];
        for (int i = 0; i < n; ++i) dst[config.n_cp + i] = body[static_cast<std::size_t>(i)];
    }
    return out;
}

FreqFrame demodulate(std::span<const cplx> samples, const FrameConfig& config)
{
    if (samples.size() != static_cast<std::size_t>(config.frame_samples()))
        throw std::invalid_argument("demodulate: sample count must equal M * (N + N_cp)");

    const auto n = static_cast<std::size_t>(config.n_fft);
    const auto ns = static_cast<std::size_t>(config.samples_per_symbol());
    FreqFrame frame(config.m_symbols, config.n_fft);
    for (int m = 0; m < config.m_symbols; ++m) {
        const auto body = samples.subspan(static_cast<std::size_t>(m) * ns + static_cast<std::size_t>(config.n_cp), n);
        const auto spectrum = dft(body);
        std::copy(spectrum.begin(), spectrum.end(), frame.row(m).begin());
    }
    return frame;
}

}  // namespace pnc
