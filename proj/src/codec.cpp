#include "pnc/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace pnc {

RaCode make_ra_code(int k_info, std::uint64_t interleaver_seed, int repeat)
{
    if (k_info < 1 || repeat < 1) throw std::invalid_argument("make_ra_code: k_info and repeat must be positive");
    RaCode code;
    code.k_info = k_info;
    code.repeat = repeat;
    code.interleaver_seed = interleaver_seed;
    code.interleaver.resize(static_cast<std::size_t>(code.n_coded()));
    std::iota(code.interleaver.begin(), code.interleaver.end(), 0);
    std::mt19937_64 rng(interleaver_seed);
    std::shuffle(code.interleaver.begin(), code.interleaver.end(), rng);
    return code;
}

Bits ra_encode(std::span<const std::uint8_t> info_bits, const RaCode& code)
{
    if (info_bits.size() != static_cast<std::size_t>(code.k_info))
        throw std::invalid_argument("ra_encode: info length does not match the code");

    Bits coded(static_cast<std::size_t>(code.n_coded()));
    std::uint8_t acc = 0;
    for (std::size_t t = 0; t < coded.size(); ++t) {
        const auto s = static_cast<std::size_t>(code.interleaver[t]);
        acc ^= info_bits[s / static_cast<std::size_t>(code.repeat)] & 1;
        coded[t] = acc;
    }
    return coded;
}

PairEvidence::PairEvidence(int n_tones, int constellation_size)
    : n_tones_(n_tones), q_(constellation_size),
      table_(static_cast<std::size_t>(n_tones) * static_cast<std::size_t>(constellation_size * constellation_size), 0.0)
{}

std::span<double> PairEvidence::tone(int t)
{
    return {table_.data() + static_cast<std::ptrdiff_t>(t) * alphabet(), static_cast<std::size_t>(alphabet())};
}

std::span<const double> PairEvidence::tone(int t) const
{
    return {table_.data() + static_cast<std::ptrdiff_t>(t) * alphabet(), static_cast<std::size_t>(alphabet())};
}

namespace {

using Msg = std::array<double, 4>;

constexpr Msg kUniform{0.25, 0.25, 0.25, 0.25};

void normalize(Msg& m)
{
    const double sum = m[0] + m[1] + m[2] + m[3];
    if (!(sum > 0.0) || !std::isfinite(sum)) {
        m = kUniform;
        return;
    }
    for (double& v : m) v = std::max(v / sum, VirtualDecoder::kMessageFloor);
}

Msg times(const Msg& a, const Msg& b) { return {a[0] * b[0], a[1] * b[1], a[2] * b[2], a[3] * b[3]}; }

// Distribution of x ^ y over Z2 x Z2.
Msg xor_convolve(const Msg& a, const Msg& b)
{
    Msg out{};
    for (int x = 0; x < 4; ++x)
        for (int y = 0; y < 4; ++y) out[static_cast<std::size_t>(x ^ y)] += a[static_cast<std::size_t>(x)] * b[static_cast<std::size_t>(y)];
    return out;
}

Msg project_to_product(const Msg& m)
{
    const double a0 = m[0] + m[1], a1 = m[2] + m[3];
    const double b0 = m[0] + m[2], b1 = m[1] + m[3];
    return {a0 * b0, a0 * b1, a1 * b0, a1 * b1};
}

}  // namespace

VirtualDecoder::VirtualDecoder(const PairEvidence& evidence, const RaCode& code, int bits_per_symbol,
                               PairMessages messages)
    : evidence_(evidence), code_(code), bps_(bits_per_symbol), mode_(messages), n_(code.n_coded())
{
    if (bps_ < 1 || (1 << bps_) != evidence.constellation_size())
        throw std::invalid_argument("VirtualDecoder: constellation size does not match bits per symbol");
    if (evidence.n_tones() * bps_ != n_)
        throw std::invalid_argument("VirtualDecoder: evidence does not cover the codeword");
    if (static_cast<int>(code.interleaver.size()) != n_)
        throw std::invalid_argument("VirtualDecoder: interleaver length mismatch");

    for (int t = 0; t < evidence.n_tones(); ++t) {
        double sum = 0.0;
        for (const double v : evidence.tone(t)) {
            if (!(v >= 0.0) || !std::isfinite(v)) throw std::domain_error("VirtualDecoder: invalid evidence entry");
            sum += v;
        }
        if (!(sum > 0.0)) throw std::domain_error("VirtualDecoder: all-zero evidence table");
    }

    // combo = sum_r y_r * 4^(bps-1-r), y_r = 2*cA + cB for the r-th bit of the tone.
    const int combos = 1 << (2 * bps_);
    combo_to_entry_.resize(static_cast<std::size_t>(combos));
    for (int combo = 0; combo < combos; ++combo) {
        int label_a = 0, label_b = 0;
        for (int r = 0; r < bps_; ++r) {
            const int y = (combo >> (2 * (bps_ - 1 - r))) & 3;
            label_a = (label_a << 1) | (y >> 1);
            label_b = (label_b << 1) | (y & 1);
        }
        combo_to_entry_[static_cast<std::size_t>(combo)] = label_a * evidence.constellation_size() + label_b;
    }

    info_edges_.assign(static_cast<std::size_t>(n_), -1);
    std::vector<int> fill(static_cast<std::size_t>(code.k_info), 0);
    for (int t = 0; t < n_; ++t) {
        const int j = code.interleaver[static_cast<std::size_t>(t)] / code.repeat;
        info_edges_[static_cast<std::size_t>(j * code.repeat + fill[static_cast<std::size_t>(j)]++)] = t;
    }

    const auto n = static_cast<std::size_t>(n_);
    channel_.assign(n, kUniform);
    check_self_.assign(n, kUniform);
    check_prev_.assign(n, kUniform);
    check_info_.assign(n, kUniform);
}

VirtualDecoder::Msg VirtualDecoder::extrinsic_from_code(int t) const
{
    Msg m = check_self_[static_cast<std::size_t>(t)];
    if (t + 1 < n_) m = times(m, check_prev_[static_cast<std::size_t>(t + 1)]);
    return m;
}

void VirtualDecoder::update_channel_messages()
{
    const int combos = static_cast<int>(combo_to_entry_.size());
    std::vector<Msg> ext(static_cast<std::size_t>(bps_));
    for (int s = 0; s < evidence_.n_tones(); ++s) {
        const auto table = evidence_.tone(s);
        for (int r = 0; r < bps_; ++r) ext[static_cast<std::size_t>(r)] = extrinsic_from_code(s * bps_ + r);

        for (int r = 0; r < bps_; ++r) {
            Msg out{};
            for (int combo = 0; combo < combos; ++combo) {
                double w = table[static_cast<std::size_t>(combo_to_entry_[static_cast<std::size_t>(combo)])];
                for (int q = 0; q < bps_; ++q) {
                    if (q == r) continue;
                    w *= ext[static_cast<std::size_t>(q)][static_cast<std::size_t>((combo >> (2 * (bps_ - 1 - q))) & 3)];
                }
                out[static_cast<std::size_t>((combo >> (2 * (bps_ - 1 - r))) & 3)] += w;
            }
            normalize(out);
            channel_[static_cast<std::size_t>(s * bps_ + r)] = out;
        }
    }
}

void VirtualDecoder::update_checks()
{
    const auto n = static_cast<std::size_t>(n_);
    const auto repeat = static_cast<std::size_t>(code_.repeat);

    // Variable -> check messages, all computed from the previous check outputs.
    std::vector<Msg> from_prev(n), from_self(n), from_info(n);
    for (std::size_t t = 0; t < n; ++t) {
        // y[t] toward check t+1 (where it is the "previous" accumulator state).
        Msg up = times(channel_[t], check_self_[t]);
        // y[t] toward check t.
        Msg own = channel_[t];
        if (t + 1 < n) own = times(own, check_prev_[t + 1]);
        normalize(up);
        normalize(own);
        if (t + 1 < n) from_prev[t + 1] = up;
        from_self[t] = own;
    }
    from_prev[0] = {1.0, 0.0, 0.0, 0.0};  // accumulator starts at zero

    for (std::size_t j = 0; j < static_cast<std::size_t>(code_.k_info); ++j) {
        for (std::size_t r = 0; r < repeat; ++r) {
            Msg m{1.0, 1.0, 1.0, 1.0};
            for (std::size_t q = 0; q < repeat; ++q)
                if (q != r) m = times(m, check_info_[static_cast<std::size_t>(info_edges_[j * repeat + q])]);
            normalize(m);
            from_info[static_cast<std::size_t>(info_edges_[j * repeat + r])] = m;
        }
    }

    if (mode_ == PairMessages::factorized) {
        for (std::size_t t = 0; t < n; ++t) {
            from_prev[t] = project_to_product(from_prev[t]);
            from_self[t] = project_to_product(from_self[t]);
            from_info[t] = project_to_product(from_info[t]);
        }
    }

    // Check t enforces y[t-1] ^ d[t] ^ y[t] = 0.
    for (std::size_t t = 0; t < n; ++t) {
        Msg to_self = xor_convolve(from_prev[t], from_info[t]);
        Msg to_info = xor_convolve(from_prev[t], from_self[t]);
        normalize(to_self);
        normalize(to_info);
        check_self_[t] = to_self;
        check_info_[t] = to_info;
        if (t > 0) {
            Msg to_prev = xor_convolve(from_info[t], from_self[t]);
            normalize(to_prev);
            check_prev_[t] = to_prev;
        }
    }
}

void VirtualDecoder::iterate()
{
    update_channel_messages();
    update_checks();
    ++iterations_;
}

PairPosterior VirtualDecoder::posterior() const
{
    PairPosterior out;
    out.constellation_size = evidence_.constellation_size();
    const auto alphabet = static_cast<std::size_t>(out.alphabet());
    out.symbol_table.assign(static_cast<std::size_t>(evidence_.n_tones()) * alphabet, 0.0);

    const int combos = static_cast<int>(combo_to_entry_.size());
    std::vector<Msg> ext(static_cast<std::size_t>(bps_));
    for (int s = 0; s < evidence_.n_tones(); ++s) {
        const auto table = evidence_.tone(s);
        for (int r = 0; r < bps_; ++r) ext[static_cast<std::size_t>(r)] = extrinsic_from_code(s * bps_ + r);
        double* dst = out.symbol_table.data() + static_cast<std::ptrdiff_t>(s) * static_cast<std::ptrdiff_t>(alphabet);
        double sum = 0.0;
        for (int combo = 0; combo < combos; ++combo) {
            const auto entry = static_cast<std::size_t>(combo_to_entry_[static_cast<std::size_t>(combo)]);
            double w = table[entry];
            for (int q = 0; q < bps_; ++q)
                w *= ext[static_cast<std::size_t>(q)][static_cast<std::size_t>((combo >> (2 * (bps_ - 1 - q))) & 3)];
            dst[entry] += w;
            sum += w;
        }
        if (sum > 0.0 && std::isfinite(sum)) {
            for (std::size_t e = 0; e < alphabet; ++e) dst[e] /= sum;
        } else {
            // Code messages contradict the evidence everywhere; fall back to the evidence alone.
            double esum = 0.0;
            for (std::size_t e = 0; e < alphabet; ++e) esum += table[e];
            for (std::size_t e = 0; e < alphabet; ++e) dst[e] = table[e] / esum;
        }
    }

    const auto repeat = static_cast<std::size_t>(code_.repeat);
    out.info_bits.resize(static_cast<std::size_t>(code_.k_info));
    for (std::size_t j = 0; j < out.info_bits.size(); ++j) {
        Msg m{1.0, 1.0, 1.0, 1.0};
        for (std::size_t r = 0; r < repeat; ++r)
            m = times(m, check_info_[static_cast<std::size_t>(info_edges_[j * repeat + r])]);
        const double sum = m[0] + m[1] + m[2] + m[3];
        for (double& v : m) v /= sum;
        out.info_bits[j] = m;
    }
    return out;
}

PairPosterior bp_decode(const PairEvidence& evidence, const RaCode& code, int bits_per_symbol,
                        const BpOptions& options)
{
    if (options.iterations < 1) throw std::invalid_argument("bp_decode: need at least one iteration");
    VirtualDecoder decoder(evidence, code, bits_per_symbol, options.messages);
    for (int i = 0; i < options.iterations; ++i) decoder.iterate();
    return decoder.posterior();
}

}  // namespace pnc
