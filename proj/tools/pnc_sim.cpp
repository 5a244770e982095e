// pnc-sim - Monte Carlo BER / phase-MSE sweeps for the OFDM PNC relay receiver.
//
//   pnc-sim run <config> [--snr 0,2,4] [--seed N] [--out results.csv]
//   pnc-sim sweep-c <config> [--out prefix.csv]

#include "pnc/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

std::vector<double> parse_snr_list(const std::string& text)
{
    std::vector<double> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad SNR value '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty SNR list");
    return out;
}

void print_summary(const pnc::ExperimentResult& result, std::ostream& os)
{
    char line[200];
    std::snprintf(line, sizeof line, "%-9s %3s %7s %11s %23s %10s %10s %8s\n", "receiver", "K", "snr_db", "ber",
                  "ber 95% interval", "mse_a", "mse_b", "frames");
    os << line;
    for (const auto& r : result.rows) {
        const auto ci = r.ber_interval();
        std::snprintf(line, sizeof line, "%-9s %3d %7.2f %11.4e [%10.3e, %10.3e] %10.4e %10.4e %8lld\n",
                      r.receiver.c_str(), r.em_iters, r.snr_db, r.ber, ci.lo, ci.hi, r.mse_a, r.mse_b, r.frames);
        os << line;
    }
}

std::string with_suffix(const std::string& path, const std::string& suffix)
{
    const std::filesystem::path p(path);
    auto name = p.stem().string() + suffix + p.extension().string();
    return (p.parent_path() / name).string();
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"OFDM physical-layer network coding relay simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string snr_text;
    std::uint64_t seed = 0;
    std::string out_path;
    int threads = -1;

    auto* run = app.add_subcommand("run", "Run the sweep described by a config file");
    run->add_option("config", config_path, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
    run->add_option("--snr", snr_text, "Comma-separated Eb/N0 list in dB");
    auto* seed_opt = run->add_option("--seed", seed, "Master seed");
    run->add_option("--out", out_path, "CSV output path");
    run->add_option("--threads", threads, "Worker threads (0 = all cores)");

    auto* sweep = app.add_subcommand("sweep-c", "Compare power-decay factors c = 1/4 and c = 1");
    sweep->add_option("config", config_path, "Experiment config (INI)")->required()->check(CLI::ExistingFile);
    sweep->add_option("--snr", snr_text, "Comma-separated Eb/N0 list in dB");
    auto* sweep_seed_opt = sweep->add_option("--seed", seed, "Master seed");
    sweep->add_option("--out", out_path, "CSV output path; _c0.25 and _c1 are appended");
    sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");

    CLI11_PARSE(app, argc, argv);

    try {
        pnc::ExperimentConfig config = pnc::load_experiment_config(config_path);
        if (!snr_text.empty()) config.snr_db = parse_snr_list(snr_text);
        if (*seed_opt || *sweep_seed_opt) config.master_seed = seed;
        if (!out_path.empty()) config.output_path = out_path;
        if (threads >= 0) config.threads = threads;

        if (*run) {
            const auto result = pnc::run_experiment(config);
            print_summary(result, std::cout);
            if (!config.output_path.empty()) pnc::emit_csv(result, config.output_path);
        } else {
            config.channel = pnc::ChannelKind::selective;
            for (const auto& [decay, suffix] : {std::pair{0.25, "_c0.25"}, std::pair{1.0, "_c1"}}) {
                config.decay = decay;
                config.validate();
                std::cout << "decay c = " << decay << "\n";
                const auto result = pnc::run_experiment(config);
                print_summary(result, std::cout);
                if (!config.output_path.empty()) pnc::emit_csv(result, with_suffix(config.output_path, suffix));
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "pnc-sim: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
