// Reference implementations the library is checked against. Each one is
// written from the model equations directly, without sharing code paths with
// the library beyond plain data types.

#pragma once

#include "pnc/codec.hpp"
#include "pnc/frame.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

namespace oracle {

using pnc::cplx;

// Repeat, permute, accumulate; one step at a time.
inline pnc::Bits ra_encode(std::span<const std::uint8_t> info, std::span<const int> interleaver, int repeat)
{
    std::vector<std::uint8_t> repeated;
    for (auto b : info)
        for (int r = 0; r < repeat; ++r) repeated.push_back(b);
    std::vector<std::uint8_t> permuted(repeated.size());
    for (std::size_t t = 0; t < permuted.size(); ++t) permuted[t] = repeated[static_cast<std::size_t>(interleaver[t])];
    pnc::Bits out(permuted.size());
    std::uint8_t state = 0;
    for (std::size_t t = 0; t < permuted.size(); ++t) {
        state = static_cast<std::uint8_t>(state ^ permuted[t]);
        out[t] = state;
    }
    return out;
}

// LLR of a ^ b from LLRs of a and b, log P(0)/P(1).
inline double boxplus(double a, double b)
{
    if (std::isinf(a) && a > 0) return b;
    if (std::isinf(b) && b > 0) return a;
    return 2.0 * std::atanh(std::tanh(a / 2.0) * std::tanh(b / 2.0));
}

/**
 * Single-user RA decoder in the LLR domain, flooding schedule: every
 * iteration computes all variable-to-check messages from the previous check
 * outputs and then all check outputs. `channel_llr` has one entry per coded
 * bit. Returns the posterior LLR of every info bit.
 */
inline std::vector<double> single_user_ra_decode(std::span<const double> channel_llr, std::span<const int> interleaver,
                                                 int repeat, int iterations)
{
    const std::size_t n = channel_llr.size();
    const std::size_t k = n / static_cast<std::size_t>(repeat);
    std::vector<std::vector<std::size_t>> edges(k);
    for (std::size_t t = 0; t < n; ++t) edges[static_cast<std::size_t>(interleaver[t] / repeat)].push_back(t);

    std::vector<double> to_self(n, 0.0), to_prev(n, 0.0), to_info(n, 0.0);
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> from_prev(n), from_self(n), from_info(n, 0.0);
        from_prev[0] = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            if (t + 1 < n) from_prev[t + 1] = channel_llr[t] + to_self[t];
            from_self[t] = channel_llr[t] + (t + 1 < n ? to_prev[t + 1] : 0.0);
        }
        for (const auto& e : edges)
            for (std::size_t t : e)
                for (std::size_t s : e)
                    if (s != t) from_info[t] += to_info[s];
        for (std::size_t t = 0; t < n; ++t) {
            to_self[t] = boxplus(from_prev[t], from_info[t]);
            to_info[t] = boxplus(from_prev[t], from_self[t]);
            if (t > 0) to_prev[t] = boxplus(from_info[t], from_self[t]);
        }
    }
    std::vector<double> out(k, 0.0);
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t t : edges[j]) out[j] += to_info[t];
    return out;
}

/**
 * Exact bitwise MAP of b_A ^ b_B by enumerating every pair of info words.
 * `tone_likelihood(t, labelA, labelB)` is p(R_t | X_A, X_B) for tone t,
 * where coded bits t*bps .. t*bps+bps-1 of each node form the labels.
 * Returns P(b_A ^ b_B = 1) per info bit.
 */
template <class Likelihood>
std::vector<double> exhaustive_xor_posterior(int k, std::span<const int> interleaver, int repeat, int bps,
                                             Likelihood&& tone_likelihood)
{
    const int words = 1 << k;
    std::vector<pnc::Bits> codewords(static_cast<std::size_t>(words));
    for (int w = 0; w < words; ++w) {
        pnc::Bits info(static_cast<std::size_t>(k));
        for (int j = 0; j < k; ++j) info[static_cast<std::size_t>(j)] = static_cast<std::uint8_t>((w >> j) & 1);
        codewords[static_cast<std::size_t>(w)] = ra_encode(info, interleaver, repeat);
    }
    const int n_tones = static_cast<int>(interleaver.size()) / bps;
    auto labels = [&](const pnc::Bits& c, int t) {
        int label = 0;
        for (int r = 0; r < bps; ++r) label = (label << 1) | c[static_cast<std::size_t>(t * bps + r)];
        return label;
    };

    std::vector<double> one(static_cast<std::size_t>(k), 0.0);
    double total = 0.0;
    for (int wa = 0; wa < words; ++wa)
        for (int wb = 0; wb < words; ++wb) {
            double p = 1.0;
            for (int t = 0; t < n_tones; ++t)
                p *= tone_likelihood(t, labels(codewords[static_cast<std::size_t>(wa)], t),
                                     labels(codewords[static_cast<std::size_t>(wb)], t));
            total += p;
            const int x = wa ^ wb;
            for (int j = 0; j < k; ++j)
                if ((x >> j) & 1) one[static_cast<std::size_t>(j)] += p;
        }
    for (double& v : one) v /= total;
    return one;
}

// Unnormalized Gaussian kernel exp(-|r - eA xA hA - eB xB hB|^2 / s2).
inline double evidence_kernel(cplx r, cplx xa, cplx ha, double theta_a, cplx xb, cplx hb, double theta_b, double s2)
{
    const cplx model = std::exp(cplx(0.0, theta_a)) * xa * ha + std::exp(cplx(0.0, theta_b)) * xb * hb;
    const double dr = r.real() - model.real();
    const double di = r.imag() - model.imag();
    return std::exp(-(dr * dr + di * di) / s2);
}

// XOR MAP from a pair table (00, 01, 10, 11), by enumerating all four entries.
inline std::uint8_t xor_decision(const pnc::PairBitTable& p)
{
    double prob[2] = {0.0, 0.0};
    for (int ba = 0; ba < 2; ++ba)
        for (int bb = 0; bb < 2; ++bb) prob[ba ^ bb] += p[static_cast<std::size_t>(2 * ba + bb)];
    return prob[1] > prob[0] ? 1 : 0;
}

}  // namespace oracle
