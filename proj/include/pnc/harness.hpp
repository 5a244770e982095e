// harness.hpp - Monte Carlo driver for BER / phase-MSE sweeps
//
// Every trial draws its own channel, CFOs, delay, payload and noise from an
// RNG seeded by (master_seed, snr index, trial index), so a sweep is a pure
// function of its configuration regardless of thread count. All configured
// receivers see the same received samples in each trial.

#pragma once

#include "pnc/channel.hpp"
#include "pnc/codec.hpp"
#include "pnc/frame.hpp"
#include "pnc/receiver.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pnc {

enum class ChannelKind { flat, selective };

struct ExperimentConfig {
    // [frame]
    Modulation modulation = Modulation::qpsk;
    int m_symbols = 10;
    std::uint64_t interleaver_seed = 1;

    // [receiver]
    bool baseline = true;
    std::vector<int> em_iters{1, 7};
    int bp_inner_iters = 20;
    ParticleConfig particle;
    PairMessages messages = PairMessages::joint;
    bool literal_ls = false;
    std::optional<double> sigma_w2;  // unset: derived from the noise level and delta

    // [channel]
    ChannelKind channel = ChannelKind::flat;
    int taps = 4;
    double decay = 1.0;
    double delta = 0.1;
    std::optional<int> delay;  // unset: drawn per frame
    bool noiseless = false;
    bool allow_cp_violation = false;

    // [run]
    std::vector<double> snr_db;
    int trials_per_snr = 1000;
    int min_frames = 0;
    int target_errors = 100;  // <= 0 runs every trial
    std::uint64_t master_seed = 1;
    int threads = 1;  // 0 = hardware concurrency
    std::string output_path;
    bool timing = true;  // false writes 0 seconds so reruns are byte-identical

    FrameConfig frame_config() const;
    /// Throws std::invalid_argument before any trial runs.
    void validate() const;
};

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

/// Wilson score interval for a binomial proportion; z = 1.96 gives 95 %.
Interval wilson_interval(long long successes, long long trials, double z = 1.96);

struct ResultRow {
    std::string receiver;  // "baseline" or "em_bp"
    int em_iters = 0;
    double snr_db = 0.0;
    double ber = 0.0;
    double mse_a = 0.0;
    double mse_b = 0.0;
    long long bits = 0;
    long long frames = 0;
    double seconds = 0.0;

    // Not serialized.
    long long errors = 0;
    double mse_a_se = 0.0;  // standard error of the per-frame mean
    double mse_b_se = 0.0;

    Interval ber_interval(double z = 1.96) const { return wilson_interval(errors, bits, z); }
    double mse() const { return 0.5 * (mse_a + mse_b); }
    double mse_se() const { return 0.5 * std::sqrt(mse_a_se * mse_a_se + mse_b_se * mse_b_se); }
};

struct ExperimentResult {
    std::vector<ResultRow> rows;

    /// Throws std::out_of_range if no such row.
    const ResultRow& at(const std::string& receiver, int em_iters, double snr_db) const;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Per-node mean over m of |e^{j est} - e^{j truth}|^2.
std::array<double, 2> mse_metric(std::span<const std::array<double, 2>> estimated,
                                 std::span<const std::array<double, 2>> truth);

/// Header: receiver,em_iters,snr_db,ber,mse_a,mse_b,bits,frames,seconds
std::string to_csv(const ExperimentResult& result);
void emit_csv(const ExperimentResult& result, const std::string& path);
ExperimentResult parse_csv(const std::string& text);

/// INI-style file, sections [frame] [receiver] [channel] [run]; see README.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace pnc
