#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "pnc/codec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using namespace pnc;

namespace {

Bits random_bits(std::size_t n, std::mt19937_64& rng)
{
    std::bernoulli_distribution coin(0.5);
    Bits b(n);
    for (auto& x : b) x = coin(rng);
    return b;
}

// BPSK evidence for a superposition with gains ha, hb and noise variance s2.
PairEvidence bpsk_evidence(const Bits& ca, const Bits& cb, cplx ha, cplx hb, double s2, std::mt19937_64& rng,
                           std::vector<cplx>* received = nullptr)
{
    std::normal_distribution<double> g(0.0, std::sqrt(s2 / 2.0));
    PairEvidence ev(static_cast<int>(ca.size()), 2);
    for (std::size_t t = 0; t < ca.size(); ++t) {
        const cplx xa = ca[t] ? -1.0 : 1.0, xb = cb[t] ? -1.0 : 1.0;
        const cplx r = ha * xa + hb * xb + cplx(g(rng), g(rng));
        if (received) received->push_back(r);
        auto tone = ev.tone(static_cast<int>(t));
        for (int la = 0; la < 2; ++la)
            for (int lb = 0; lb < 2; ++lb)
                tone[static_cast<std::size_t>(la * 2 + lb)] =
                    oracle::evidence_kernel(r, la ? -1.0 : 1.0, ha, 0.0, lb ? -1.0 : 1.0, hb, 0.0, s2);
    }
    return ev;
}

}  // namespace

TEST_CASE("ra code lengths")
{
    const auto code = make_ra_code(4, 1);
    CHECK(code.n_coded() == 12);
    CHECK(ra_encode(Bits(4, 0), code) == Bits(12, 0));
    auto sorted = code.interleaver;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 12; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
    CHECK(make_ra_code(4, 1).interleaver == code.interleaver);
    CHECK_THROWS_AS(make_ra_code(0, 1), std::invalid_argument);
    CHECK_THROWS_AS(ra_encode(Bits(5, 0), code), std::invalid_argument);
}

TEST_CASE("ra encoder matches step-by-step oracle")
{
    std::mt19937_64 rng(21);
    for (int k : {8, 8, 8, 16, 320}) {
        const auto code = make_ra_code(k, rng());
        for (int trial = 0; trial < 20; ++trial) {
            const auto info = random_bits(static_cast<std::size_t>(k), rng);
            CHECK(ra_encode(info, code) == oracle::ra_encode(info, code.interleaver, code.repeat));
        }
    }
}

TEST_CASE("ra code is linear")
{
    std::mt19937_64 rng(4);
    const auto code = make_ra_code(32, 9);
    const auto a = random_bits(32, rng), b = random_bits(32, rng);
    Bits x(32);
    for (std::size_t j = 0; j < 32; ++j) x[j] = a[j] ^ b[j];
    const auto ca = ra_encode(a, code), cb = ra_encode(b, code), cx = ra_encode(x, code);
    for (std::size_t t = 0; t < cx.size(); ++t) CHECK(cx[t] == (ca[t] ^ cb[t]));
}

TEST_CASE("delta evidence is a fixed point")
{
    std::mt19937_64 rng(8);
    for (auto mod : {Modulation::bpsk, Modulation::qpsk}) {
        Constellation con(mod);
        const int bps = con.bits_per_symbol();
        const auto code = make_ra_code(64, 3);
        const auto a = random_bits(64, rng), b = random_bits(64, rng);
        const auto ca = ra_encode(a, code), cb = ra_encode(b, code);
        const int n_tones = code.n_coded() / bps;
        PairEvidence ev(n_tones, con.size());
        std::vector<int> truth(static_cast<std::size_t>(n_tones));
        for (int t = 0; t < n_tones; ++t) {
            int la = 0, lb = 0;
            for (int r = 0; r < bps; ++r) {
                la = (la << 1) | ca[static_cast<std::size_t>(t * bps + r)];
                lb = (lb << 1) | cb[static_cast<std::size_t>(t * bps + r)];
            }
            truth[static_cast<std::size_t>(t)] = la * con.size() + lb;
            ev.tone(t)[static_cast<std::size_t>(la * con.size() + lb)] = 1.0;
        }
        for (int iters : {1, 20}) {
            const auto post = bp_decode(ev, code, bps, {iters, PairMessages::joint});
            REQUIRE(post.n_tones() == n_tones);
            for (int t = 0; t < n_tones; ++t) {
                const auto s = post.symbol(t);
                CHECK(s[static_cast<std::size_t>(truth[static_cast<std::size_t>(t)])] == doctest::Approx(1.0).epsilon(1e-12));
            }
            for (std::size_t j = 0; j < a.size(); ++j) {
                CHECK(post.info_bits[j][static_cast<std::size_t>(2 * a[j] + b[j])] == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(oracle::xor_decision(post.info_bits[j]) == (a[j] ^ b[j]));
            }
        }
    }
}

TEST_CASE("posteriors are normalized")
{
    std::mt19937_64 rng(13);
    const auto code = make_ra_code(40, 2);
    const auto ca = ra_encode(random_bits(40, rng), code), cb = ra_encode(random_bits(40, rng), code);
    const auto ev = bpsk_evidence(ca, cb, 1.0, std::polar(0.8, 1.1), 0.6, rng);
    for (auto mode : {PairMessages::joint, PairMessages::factorized}) {
        const auto post = bp_decode(ev, code, 1, {20, mode});
        for (int t = 0; t < post.n_tones(); ++t) {
            double s = 0.0;
            for (double v : post.symbol(t)) {
                CHECK(v >= 0.0);
                s += v;
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
        for (const auto& p : post.info_bits) CHECK(p[0] + p[1] + p[2] + p[3] == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("swapping the nodes swaps the posteriors")
{
    std::mt19937_64 rng(17);
    const auto code = make_ra_code(48, 5);
    Constellation con(Modulation::qpsk);
    const int n_tones = code.n_coded() / 2;
    PairEvidence ev(n_tones, 4), swapped(n_tones, 4);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int t = 0; t < n_tones; ++t)
        for (int la = 0; la < 4; ++la)
            for (int lb = 0; lb < 4; ++lb) {
                const double v = u(rng);
                ev.tone(t)[static_cast<std::size_t>(la * 4 + lb)] = v;
                swapped.tone(t)[static_cast<std::size_t>(lb * 4 + la)] = v;
            }
    const auto p = bp_decode(ev, code, 2), q = bp_decode(swapped, code, 2);
    for (std::size_t j = 0; j < p.info_bits.size(); ++j) {
        CHECK(p.info_bits[j][0] == doctest::Approx(q.info_bits[j][0]).epsilon(1e-12));
        CHECK(p.info_bits[j][1] == doctest::Approx(q.info_bits[j][2]).epsilon(1e-12));
        CHECK(p.info_bits[j][2] == doctest::Approx(q.info_bits[j][1]).epsilon(1e-12));
        CHECK(p.info_bits[j][3] == doctest::Approx(q.info_bits[j][3]).epsilon(1e-12));
    }
}

TEST_CASE("node A marginals match a single-user decoder when B is uninformative")
{
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const auto code = make_ra_code(32, rng());
        const auto ca = ra_encode(random_bits(32, rng), code);
        PairEvidence ev(code.n_coded(), 2);
        std::vector<double> llr(static_cast<std::size_t>(code.n_coded()));
        for (int t = 0; t < code.n_coded(); ++t) {
            // Real BPSK sample with noise variance s2 = 1.
            const double r = (ca[static_cast<std::size_t>(t)] ? -1.0 : 1.0) + g(rng);
            const double p0 = std::exp(-(r - 1.0) * (r - 1.0) / 2.0), p1 = std::exp(-(r + 1.0) * (r + 1.0) / 2.0);
            llr[static_cast<std::size_t>(t)] = std::log(p0 / p1);
            for (int lb = 0; lb < 2; ++lb) {
                ev.tone(t)[static_cast<std::size_t>(0 * 2 + lb)] = p0;
                ev.tone(t)[static_cast<std::size_t>(1 * 2 + lb)] = p1;
            }
        }
        for (int iters : {1, 3, 10}) {
            const auto post = bp_decode(ev, code, 1, {iters, PairMessages::joint});
            const auto ref = oracle::single_user_ra_decode(llr, code.interleaver, code.repeat, iters);
            for (std::size_t j = 0; j < ref.size(); ++j) {
                const auto& p = post.info_bits[j];
                CHECK(p[2] + p[3] == doctest::Approx(1.0 / (1.0 + std::exp(ref[j]))).epsilon(1e-9));
                if (std::abs(ref[j]) < 30.0) CHECK(std::log((p[0] + p[1]) / (p[2] + p[3])) == doctest::Approx(ref[j]).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("joint decoding agrees with exhaustive MAP on short frames")
{
    // k = 8 BPSK at 6 dB Eb/N0: s2 = 1 / (R_c Eb/N0).
    const double s2 = 1.0 / (std::pow(10.0, 0.6) / 3.0);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    int agree = 0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        const auto code = make_ra_code(8, rng());
        const auto a = random_bits(8, rng), b = random_bits(8, rng);
        const cplx hb = std::polar(1.0, phase(rng));
        std::vector<cplx> r;
        const auto ev = bpsk_evidence(ra_encode(a, code), ra_encode(b, code), 1.0, hb, s2, rng, &r);
        const auto post = bp_decode(ev, code, 1);
        const auto exact = oracle::exhaustive_xor_posterior(8, code.interleaver, code.repeat, 1, [&](int t, int la, int lb) {
            return ev.tone(t)[static_cast<std::size_t>(la * 2 + lb)];
        });
        bool same = true;
        for (std::size_t j = 0; j < 8; ++j)
            same = same && oracle::xor_decision(post.info_bits[j]) == (exact[j] > 0.5 ? 1 : 0);
        agree += same;
    }
    MESSAGE("frames agreeing with MAP: " << agree << " / " << trials);
    CHECK(agree >= 190);
}

TEST_CASE("decoder input validation")
{
    const auto code = make_ra_code(8, 1);
    PairEvidence ev(24, 2);
    for (int t = 0; t < 24; ++t) ev.tone(t)[0] = 1.0;
    CHECK_NOTHROW(VirtualDecoder(ev, code, 1));
    CHECK_THROWS_AS(VirtualDecoder(ev, code, 2), std::invalid_argument);
    CHECK_THROWS_AS(VirtualDecoder(ev, make_ra_code(9, 1), 1), std::invalid_argument);
    ev.tone(5)[0] = 0.0;
    CHECK_THROWS_AS(VirtualDecoder(ev, code, 1), std::domain_error);
    ev.tone(5)[0] = std::nan("");
    CHECK_THROWS_AS(VirtualDecoder(ev, code, 1), std::domain_error);
    ev.tone(5)[0] = 1.0;
    CHECK_THROWS_AS(bp_decode(ev, code, 1, {0, PairMessages::joint}), std::invalid_argument);
}

TEST_CASE("messages stay finite under overwhelming evidence")
{
    std::mt19937_64 rng(41);
    const auto code = make_ra_code(64, 2);
    const auto ca = ra_encode(random_bits(64, rng), code), cb = ra_encode(random_bits(64, rng), code);
    PairEvidence ev(code.n_coded(), 2);
    for (int t = 0; t < code.n_coded(); ++t)
        for (int e = 0; e < 4; ++e) ev.tone(t)[static_cast<std::size_t>(e)] = 1e-300;
    // Contradictory hard evidence on a few tones.
    for (int t = 0; t < code.n_coded(); ++t) {
        const auto truth = static_cast<std::size_t>(2 * ca[static_cast<std::size_t>(t)] + cb[static_cast<std::size_t>(t)]);
        ev.tone(t)[t % 17 == 0 ? 3 - truth : truth] = 1.0;
    }
    const auto post = bp_decode(ev, code, 1, {30, PairMessages::joint});
    for (double v : post.symbol_table) CHECK(std::isfinite(v));
    for (const auto& p : post.info_bits)
        for (double v : p) CHECK(std::isfinite(v));
}
