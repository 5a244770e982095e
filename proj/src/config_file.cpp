#include "pnc/harness.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace pnc {
namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <typename T>
T convert(const std::string& key, const std::string& text)
{
    std::istringstream in(text);
    T value{};
    in >> value;
    if (in.fail() || !(in >> std::ws).eof()) throw std::invalid_argument("config: bad value for '" + key + "': " + text);
    return value;
}

bool convert_bool(const std::string& key, const std::string& text)
{
    if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
    if (text == "false" || text == "no" || text == "off" || text == "0") return false;
    throw std::invalid_argument("config: bad boolean for '" + key + "': " + text);
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in)
{
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }

    static const std::map<std::string, std::set<std::string>> known{
        {"frame", {"modulation", "symbols", "interleaver_seed"}},
        {"receiver", {"baseline", "em_iters", "bp_iters", "particle_rounds", "particle_grid", "forgetting",
                      "keep_grid_argmax", "shrink", "messages", "literal_ls", "sigma_w2"}},
        {"channel", {"kind", "taps", "decay", "delta", "delay", "noiseless", "allow_cp_violation"}},
        {"run", {"snr_db", "trials", "min_frames", "target_errors", "seed", "threads", "output", "timing"}},
    };

    ExperimentConfig c;
    for (const auto& [section, body] : tree) {
        const auto sec = known.find(section);
        if (sec == known.end()) throw std::invalid_argument("config: unknown section [" + section + "]");
        for (const auto& [key, node] : body) {
            if (!sec->second.contains(key)) throw std::invalid_argument("config: unknown key '" + section + "." + key + "'");
            const std::string v = trim(node.data());
            const std::string name = section + "." + key;

            if (name == "frame.modulation") c.modulation = parse_modulation(v);
            else if (name == "frame.symbols") c.m_symbols = convert<int>(name, v);
            else if (name == "frame.interleaver_seed") c.interleaver_seed = convert<std::uint64_t>(name, v);
            else if (name == "receiver.baseline") c.baseline = convert_bool(name, v);
            else if (name == "receiver.em_iters") {
                c.em_iters.clear();
                for (const auto& item : split_list(v)) c.em_iters.push_back(convert<int>(name, item));
            }
            else if (name == "receiver.bp_iters") c.bp_inner_iters = convert<int>(name, v);
            else if (name == "receiver.particle_rounds") c.particle.rounds = convert<int>(name, v);
            else if (name == "receiver.particle_grid") c.particle.grid = convert<int>(name, v);
            else if (name == "receiver.forgetting") c.particle.forgetting = convert<double>(name, v);
            else if (name == "receiver.keep_grid_argmax") c.particle.keep_grid_argmax = convert_bool(name, v);
            else if (name == "receiver.shrink") {
                if (v == "contract") c.particle.shrink = ShrinkRule::contract;
                else if (v == "toward_mean") c.particle.shrink = ShrinkRule::toward_mean;
                else throw std::invalid_argument("config: shrink must be contract or toward_mean");
            }
            else if (name == "receiver.messages") {
                if (v == "joint") c.messages = PairMessages::joint;
                else if (v == "factorized") c.messages = PairMessages::factorized;
                else throw std::invalid_argument("config: messages must be joint or factorized");
            }
            else if (name == "receiver.literal_ls") c.literal_ls = convert_bool(name, v);
            else if (name == "receiver.sigma_w2") {
                if (v == "auto") c.sigma_w2.reset();
                else c.sigma_w2 = convert<double>(name, v);
            }
            else if (name == "channel.kind") {
                if (v == "flat") c.channel = ChannelKind::flat;
                else if (v == "selective") c.channel = ChannelKind::selective;
                else throw std::invalid_argument("config: channel.kind must be flat or selective");
            }
            else if (name == "channel.taps") c.taps = convert<int>(name, v);
            else if (name == "channel.decay") c.decay = convert<double>(name, v);
            else if (name == "channel.delta") c.delta = convert<double>(name, v);
            else if (name == "channel.delay") {
                if (v == "random") c.delay.reset();
                else c.delay = convert<int>(name, v);
            }
            else if (name == "channel.noiseless") c.noiseless = convert_bool(name, v);
            else if (name == "channel.allow_cp_violation") c.allow_cp_violation = convert_bool(name, v);
            else if (name == "run.snr_db") {
                c.snr_db.clear();
                for (const auto& item : split_list(v)) c.snr_db.push_back(convert<double>(name, item));
            }
            else if (name == "run.trials") c.trials_per_snr = convert<int>(name, v);
            else if (name == "run.min_frames") c.min_frames = convert<int>(name, v);
            else if (name == "run.target_errors") c.target_errors = convert<int>(name, v);
            else if (name == "run.seed") c.master_seed = convert<std::uint64_t>(name, v);
            else if (name == "run.threads") c.threads = convert<int>(name, v);
            else if (name == "run.output") c.output_path = v;
            else if (name == "run.timing") c.timing = convert_bool(name, v);
        }
    }
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    return parse_experiment_config(in);
}

}  // namespace pnc
