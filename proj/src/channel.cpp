#include "pnc/channel.hpp"

#include "pnc/ofdm.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pnc {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx complex_gaussian(double variance, Rng& rng)
{
    std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

std::vector<cplx> response(std::span<const cplx> taps, int offset, int n_fft)
{
    if (offset + static_cast<int>(taps.size()) > n_fft)
        throw std::invalid_argument("channel impulse response longer than the DFT");
    std::vector<cplx> padded(static_cast<std::size_t>(n_fft));
    for (std::size_t l = 0; l < taps.size(); ++l) padded[static_cast<std::size_t>(offset) + l] = taps[l];
    // Unitary DFT scaled back so that H is the plain sum_l h_l exp(-j 2 pi i l / N).
    auto h = dft(padded);
    const double scale = std::sqrt(static_cast<double>(n_fft));
    for (auto& v : h) v *= scale;
    return h;
}

}  // namespace

void ChannelRealization::refresh_frequency_response(int n_fft)
{
    h_freq_a = response(taps_a, 0, n_fft);
    h_freq_b = response(taps_b, relative_delay, n_fft);
}

bool ChannelRealization::delay_within_cp(int n_cp) const
{
    const int spread_a = static_cast<int>(taps_a.size()) - 1;
    const int spread_b = relative_delay + static_cast<int>(taps_b.size()) - 1;
    return relative_delay >= 0 && std::max(spread_a, spread_b) <= n_cp;
}

NoiseModel NoiseModel::from_ebn0_db(double ebn0_db, const FrameConfig& config)
{
    const double ebn0 = std::pow(10.0, ebn0_db / 10.0);
    const double rate = 1.0 / static_cast<double>(config.code_rate_inv);
    const double per_node_power = 1.0;
    const double occupancy = static_cast<double>(config.n_fft) / static_cast<double>(config.n_data);
    return {per_node_power * occupancy / (rate * config.bits_per_symbol() * ebn0)};
}

std::vector<double> power_delay_profile(int taps, double decay)
{
    if (taps < 1 || decay < 0.0) throw std::invalid_argument("power_delay_profile: need taps >= 1 and decay >= 0");
    std::vector<double> profile(static_cast<std::size_t>(taps));
    double total = 0.0;
    for (int l = 0; l < taps; ++l) total += profile[static_cast<std::size_t>(l)] = std::exp(-decay * l);
    for (double& p : profile) p /= total;
    return profile;
}

ChannelRealization sample_flat(Rng& rng, int n_fft)
{
    return sample_selective(1, 0.0, rng, n_fft);
}

ChannelRealization sample_selective(int taps, double decay, Rng& rng, int n_fft)
{
    const auto profile = power_delay_profile(taps, decay);
    ChannelRealization chan;
    chan.taps_a.clear();
    chan.taps_b.clear();
    for (const double p : profile) chan.taps_a.push_back(complex_gaussian(p, rng));
    for (const double p : profile) chan.taps_b.push_back(complex_gaussian(p, rng));
    chan.refresh_frequency_response(n_fft);
    return chan;
}

double draw_cfo(double delta, Rng& rng)
{
    if (delta < 0.0) throw std::invalid_argument("draw_cfo: delta must be non-negative");
    if (delta == 0.0) return 0.0;
    std::uniform_real_distribution<double> uniform(-0.5 * delta, 0.5 * delta);
    return uniform(rng);
}

int draw_relative_delay(int n_cp, int taps_b, Rng& rng)
{
    const int max_delay = n_cp - taps_b + 1;
    if (max_delay < 0) throw std::invalid_argument("draw_relative_delay: channel longer than the cyclic prefix");
    std::uniform_int_distribution<int> uniform(0, max_delay);
    return uniform(rng);
}

std::vector<cplx> simulate_uplink(std::span<const cplx> frame_a, std::span<const cplx> frame_b,
                                  const ChannelRealization& chan, const NoiseModel& noise,
                                  const FrameConfig& config, Rng& rng, const UplinkOptions& options)
{
    const auto len = static_cast<std::size_t>(config.frame_samples());
    if (frame_a.size() != len || frame_b.size() != len)
        throw std::invalid_argument("simulate_uplink: frames must hold M * N_s samples");
    if (!options.allow_cp_violation && !chan.delay_within_cp(config.n_cp))
        throw std::invalid_argument("simulate_uplink: delay spread exceeds the cyclic prefix");
    if (chan.relative_delay < 0) throw std::invalid_argument("simulate_uplink: negative relative delay");
    if (noise.sigma_n2 < 0.0) throw std::invalid_argument("simulate_uplink: negative noise variance");

    const double n = static_cast<double>(config.n_fft);
    auto add_node = [&](std::span<const cplx> x, const std::vector<cplx>& taps, std::size_t delay, double cfo,
                        std::vector<cplx>& out) {
        for (std::size_t k = delay; k < len; ++k) {
            cplx acc{};
            const std::size_t src = k - delay;
            for (std::size_t l = 0; l < taps.size() && l <= src; ++l) acc += taps[l] * x[src - l];
            if (cfo != 0.0) acc *= std::polar(1.0, kTwoPi * cfo * static_cast<double>(k) / n);
            out[k] += acc;
        }
    };

    std::vector<cplx> out(len);
    add_node(frame_a, chan.taps_a, 0, chan.cfo_a, out);
    add_node(frame_b, chan.taps_b, static_cast<std::size_t>(chan.relative_delay), chan.cfo_b, out);
    if (noise.sigma_n2 > 0.0)
        for (auto& v : out) v += complex_gaussian(noise.sigma_n2, rng);
    return out;
}

PhaseTrajectory phase_trajectory(const ChannelRealization& chan, const FrameConfig& config)
{
    const double n = static_cast<double>(config.n_fft);
    const double mid = static_cast<double>(config.n_cp) + (n - 1.0) / 2.0;
    PhaseTrajectory traj;
    traj.theta.resize(static_cast<std::size_t>(config.m_symbols));
    for (int m = 0; m < config.m_symbols; ++m) {
        const double sample = static_cast<double>(m) * config.samples_per_symbol() + mid;
        traj.theta[static_cast<std::size_t>(m)] = {kTwoPi * chan.cfo_a * sample / n, kTwoPi * chan.cfo_b * sample / n};
    }
    return traj;
}

}  // namespace pnc
