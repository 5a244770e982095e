#include "pnc/harness.hpp"

#include "pnc/ofdm.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pnc {

FrameConfig ExperimentConfig::frame_config() const
{
    const int max_k = em_iters.empty() ? 0 : *std::max_element(em_iters.begin(), em_iters.end());
    FrameConfig frame = default_config(modulation, m_symbols, max_k);
    frame.bp_inner_iters = bp_inner_iters;
    return frame;
}

void ExperimentConfig::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("experiment config: " + what); };
    if (m_symbols < 1) fail("symbols must be at least 1");
    if (snr_db.empty() && !noiseless) fail("snr_db list is empty");
    if (trials_per_snr < 1) fail("trials must be at least 1");
    if (min_frames < 0) fail("min_frames must be non-negative");
    if (delta < 0.0) fail("delta must be non-negative");
    if (!baseline && em_iters.empty()) fail("no receiver selected");
    for (const int k : em_iters)
        if (k < 0) fail("em_iters entries must be non-negative");
    if (bp_inner_iters < 1) fail("bp_iters must be at least 1");
    if (threads < 0) fail("threads must be non-negative");
    if (sigma_w2 && !(*sigma_w2 > 0.0)) fail("sigma_w2 must be positive");
    if (channel == ChannelKind::selective && (taps < 1 || decay < 0.0)) fail("selective channel needs taps >= 1 and decay >= 0");
    const int taps_b = channel == ChannelKind::flat ? 1 : taps;
    if (delay) {
        if (*delay < 0) fail("delay must be non-negative");
        if (!allow_cp_violation && std::max(taps_b - 1, *delay + taps_b - 1) > frame_config().n_cp)
            fail("delay spread exceeds the cyclic prefix");
    } else if (taps_b - 1 > frame_config().n_cp) {
        fail("channel longer than the cyclic prefix");
    }
    particle.validate();
    frame_config().validate();
}

Interval wilson_interval(long long successes, long long trials, double z)
{
    if (trials <= 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

const ResultRow& ExperimentResult::at(const std::string& receiver, int em_iters, double snr_db) const
{
    for (const auto& row : rows)
        if (row.receiver == receiver && row.em_iters == em_iters && row.snr_db == snr_db) return row;
    throw std::out_of_range("no result row for " + receiver + " K=" + std::to_string(em_iters));
}

std::array<double, 2> mse_metric(std::span<const std::array<double, 2>> estimated,
                                 std::span<const std::array<double, 2>> truth)
{
    if (estimated.size() != truth.size() || estimated.empty())
        throw std::invalid_argument("mse_metric: trajectories differ in length or are empty");
    std::array<double, 2> mse{0.0, 0.0};
    for (std::size_t m = 0; m < truth.size(); ++m)
        for (std::size_t u = 0; u < 2; ++u)
            mse[u] += std::norm(std::polar(1.0, estimated[m][u]) - std::polar(1.0, truth[m][u]));
    for (double& v : mse) v /= static_cast<double>(truth.size());
    return mse;
}

namespace {

struct Receiver {
    std::string name;
    int k;
};

// One receiver's outcome on one frame.
struct FrameScore {
    long long errors = 0;
    std::array<double, 2> mse{};
};

struct Accumulator {
    long long errors = 0;
    long long frames = 0;
    std::array<double, 2> mse_sum{};
    std::array<double, 2> mse_sq{};

    void add(const FrameScore& s)
    {
        errors += s.errors;
        ++frames;
        for (std::size_t u = 0; u < 2; ++u) {
            mse_sum[u] += s.mse[u];
            mse_sq[u] += s.mse[u] * s.mse[u];
        }
    }
};

struct Setup {
    FrameConfig frame;
    ToneMap tones;
    Constellation constellation;
    RaCode code;
};

Bits random_bits(int count, Rng& rng)
{
    std::bernoulli_distribution coin(0.5);
    Bits bits(static_cast<std::size_t>(count));
    for (auto& b : bits) b = coin(rng) ? 1 : 0;
    return bits;
}

std::vector<FrameScore> run_trial(const ExperimentConfig& cfg, const Setup& setup, const std::vector<Receiver>& receivers,
                                  std::size_t snr_index, int trial)
{
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.master_seed), static_cast<std::uint32_t>(cfg.master_seed >> 32),
                      static_cast<std::uint32_t>(snr_index), static_cast<std::uint32_t>(trial)};
    Rng rng(seq);
    const FrameConfig& frame = setup.frame;

    const Bits info_a = random_bits(setup.code.k_info, rng);
    const Bits info_b = random_bits(setup.code.k_info, rng);

    ChannelRealization chan = cfg.channel == ChannelKind::flat ? sample_flat(rng, frame.n_fft)
                                                                : sample_selective(cfg.taps, cfg.decay, rng, frame.n_fft);
    chan.cfo_a = draw_cfo(cfg.delta, rng);
    chan.cfo_b = draw_cfo(cfg.delta, rng);
    chan.relative_delay = cfg.delay ? *cfg.delay : draw_relative_delay(frame.n_cp, static_cast<int>(chan.taps_b.size()), rng);
    chan.refresh_frequency_response(frame.n_fft);

    const NoiseModel noise = cfg.noiseless ? NoiseModel::noiseless()
                                           : NoiseModel::from_ebn0_db(cfg.snr_db[snr_index], frame);

    auto tx = [&](Node u, const Bits& info) {
        const auto symbols = map_bits(ra_encode(info, setup.code), setup.constellation);
        return modulate(build_tx_grid(u, symbols, frame, setup.tones), frame);
    };
    const auto samples = simulate_uplink(tx(Node::a, info_a), tx(Node::b, info_b), chan, noise, frame, rng,
                                         {cfg.allow_cp_violation});
    const FreqFrame received = demodulate(samples, frame);
    const auto truth = phase_trajectory(chan, frame);

    ReceiverConfig rx;
    rx.sigma_w2 = cfg.sigma_w2 ? *cfg.sigma_w2 : default_sigma_w2(noise.sigma_n2, cfg.delta);
    rx.bp_inner_iters = cfg.bp_inner_iters;
    rx.particle = cfg.particle;
    rx.messages = cfg.messages;
    rx.literal_ls = cfg.literal_ls;
    rx.em_iters = 0;
    for (const auto& r : receivers) rx.em_iters = std::max(rx.em_iters, r.k);

    // A run to K = max keeps every intermediate decision; snapshot k is
    // exactly what a receiver stopped at K = k (k = 0: pilot-only) returns.
    const ReceiverContext ctx{frame, setup.tones, setup.constellation, setup.code};
    const EmBpResult out = em_bp_receive(received, known_channel(chan), ctx, rx);

    std::vector<FrameScore> scores;
    for (const auto& r : receivers) {
        const auto& snap = out.snapshots[static_cast<std::size_t>(r.k)];
        FrameScore s;
        for (std::size_t j = 0; j < info_a.size(); ++j)
            s.errors += snap.xor_bits[j] != (info_a[j] ^ info_b[j]);
        s.mse = mse_metric(snap.phases.theta, truth.theta);
        scores.push_back(s);
    }
    return scores;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    const FrameConfig frame = cfg.frame_config();
    const Setup setup{frame, make_tone_map(frame), Constellation(cfg.modulation),
                      make_ra_code(frame.info_bits(), cfg.interleaver_seed, frame.code_rate_inv)};

    std::vector<Receiver> receivers;
    if (cfg.baseline) receivers.push_back({"baseline", 0});
    std::vector<int> ks = cfg.em_iters;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    for (const int k : ks) receivers.push_back({"em_bp", k});

    const std::vector<double> snrs = cfg.snr_db.empty() ? std::vector<double>{0.0} : cfg.snr_db;
    const unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                              : static_cast<unsigned>(cfg.threads);
    const int batch = static_cast<int>(threads) * 4;

    std::vector<std::vector<ResultRow>> per_receiver(receivers.size());
    for (std::size_t si = 0; si < snrs.size(); ++si) {
        const auto start = std::chrono::steady_clock::now();
        std::vector<Accumulator> acc(receivers.size());

        auto done = [&] {
            if (acc[0].frames >= cfg.trials_per_snr) return true;
            if (cfg.target_errors <= 0 || acc[0].frames < cfg.min_frames) return false;
            return std::all_of(acc.begin(), acc.end(), [&](const Accumulator& a) { return a.errors >= cfg.target_errors; });
        };

        int next_trial = 0;
        while (!done()) {
            const int count = std::min(batch, cfg.trials_per_snr - next_trial);
            std::vector<std::vector<FrameScore>> scores(static_cast<std::size_t>(count));
            if (threads == 1) {
                for (int i = 0; i < count; ++i) scores[static_cast<std::size_t>(i)] = run_trial(cfg, setup, receivers, si, next_trial + i);
            } else {
                std::vector<std::jthread> pool;
                for (unsigned w = 0; w < threads; ++w)
                    pool.emplace_back([&, w] {
                        for (int i = static_cast<int>(w); i < count; i += static_cast<int>(threads))
                            scores[static_cast<std::size_t>(i)] = run_trial(cfg, setup, receivers, si, next_trial + i);
                    });
            }
            // Accumulate in trial order so the stopping point does not depend on scheduling.
            for (const auto& frame_scores : scores) {
                for (std::size_t r = 0; r < receivers.size(); ++r) acc[r].add(frame_scores[r]);
                if (done()) break;
            }
            next_trial += count;
        }

        const double seconds =
            cfg.timing ? std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() : 0.0;
        for (std::size_t r = 0; r < receivers.size(); ++r) {
            const auto& a = acc[r];
            const double n = static_cast<double>(a.frames);
            ResultRow row;
            row.receiver = receivers[r].name;
            row.em_iters = receivers[r].k;
            row.snr_db = snrs[si];
            row.frames = a.frames;
            row.bits = a.frames * setup.code.k_info;
            row.errors = a.errors;
            row.ber = static_cast<double>(a.errors) / static_cast<double>(row.bits);
            row.mse_a = a.mse_sum[0] / n;
            row.mse_b = a.mse_sum[1] / n;
            auto se = [n](double sum, double sq) {
                if (n < 2) return 0.0;
                const double var = std::max(0.0, (sq - sum * sum / n) / (n - 1.0));
                return std::sqrt(var / n);
            };
            row.mse_a_se = se(a.mse_sum[0], a.mse_sq[0]);
            row.mse_b_se = se(a.mse_sum[1], a.mse_sq[1]);
            row.seconds = seconds;
            per_receiver[r].push_back(row);
        }
    }

    ExperimentResult result;
    for (auto& rows : per_receiver) result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    return result;
}

namespace {

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad number '" + s + "'");
    return v;
}

long long parse_int(const std::string& s)
{
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad integer '" + s + "'");
    return v;
}

constexpr const char* kCsvHeader = "receiver,em_iters,snr_db,ber,mse_a,mse_b,bits,frames,seconds";

}  // namespace

std::string to_csv(const ExperimentResult& result)
{
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& r : result.rows) {
        out += r.receiver + "," + std::to_string(r.em_iters) + "," + format_double(r.snr_db) + "," + format_double(r.ber)
               + "," + format_double(r.mse_a) + "," + format_double(r.mse_b) + "," + std::to_string(r.bits) + ","
               + std::to_string(r.frames) + "," + format_double(r.seconds) + "\n";
    }
    return out;
}

void emit_csv(const ExperimentResult& result, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << to_csv(result);
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

ExperimentResult parse_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw std::invalid_argument("parse_csv: missing or unexpected header");

    ExperimentResult result;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
        if (f.size() != 9) throw std::invalid_argument("parse_csv: expected 9 columns");
        ResultRow r;
        r.receiver = f[0];
        r.em_iters = static_cast<int>(parse_int(f[1]));
        r.snr_db = parse_double(f[2]);
        r.ber = parse_double(f[3]);
        r.mse_a = parse_double(f[4]);
        r.mse_b = parse_double(f[5]);
        r.bits = parse_int(f[6]);
        r.frames = parse_int(f[7]);
        r.seconds = parse_double(f[8]);
        result.rows.push_back(r);
    }
    return result;
}

}  // namespace pnc
