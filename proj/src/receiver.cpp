#include "pnc/receiver.hpp"

#include "pnc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pnc {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Angle difference mapped to [-pi, pi).
double wrap_signed(double delta)
{
    return std::remainder(delta, kTwoPi);
}

}  // namespace

ChannelKnowledge known_channel(const ChannelRealization& chan)
{
    return {chan.h_freq_a, chan.h_freq_b};
}

double wrap_phase(double theta)
{
    double w = std::fmod(theta, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    if (w >= kTwoPi) w = 0.0;
    return w;
}

void ParticleConfig::validate() const
{
    if (rounds < 0) throw std::invalid_argument("ParticleConfig: rounds must be non-negative");
    if (grid < 2) throw std::invalid_argument("ParticleConfig: grid must be at least 2");
    if (!(forgetting > 0.0 && forgetting < 1.0))
        throw std::invalid_argument("ParticleConfig: forgetting factor must lie in (0, 1)");
}

void ReceiverConfig::validate() const
{
    if (!(sigma_w2 > 0.0) || !std::isfinite(sigma_w2)) throw std::invalid_argument("ReceiverConfig: sigma_w2 must be positive");
    if (em_iters < 0) throw std::invalid_argument("ReceiverConfig: em_iters must be non-negative");
    if (bp_inner_iters < 1) throw std::invalid_argument("ReceiverConfig: bp_inner_iters must be at least 1");
    particle.validate();
}

double default_sigma_w2(double sigma_n2, double delta, double per_node_power)
{
    const double ici = 2.0 * std::pow(std::numbers::pi * delta / 2.0, 2) / 3.0 * per_node_power;
    return std::max(sigma_n2 + ici, 1e-6);
}

PhaseEstimate ls_pilot_phase(const FreqFrame& frame, const ToneMap& tones, const ChannelKnowledge& channel,
                             bool literal)
{
    PhaseEstimate est;
    est.theta.resize(static_cast<std::size_t>(frame.m_symbols()));
    for (const Node u : {Node::a, Node::b}) {
        const auto& h = channel.h(u);
        const auto ui = static_cast<std::size_t>(u);
        for (int m = 0; m < frame.m_symbols(); ++m) {
            cplx corr{};
            for (const int tone : tones.pilots(u)) {
                cplx ref = tones.pilot_value(u, m, tone);
                if (!literal) ref *= h[static_cast<std::size_t>(tone)];
                corr += std::conj(ref) * frame.at(m, tone);
            }
            double theta = 0.0;
            if (std::abs(corr) > 0.0) {
                theta = std::arg(corr);
            } else {
                ++est.pilot_fallbacks;
                if (m > 0) theta = est.theta[static_cast<std::size_t>(m - 1)][ui];
            }
            est.theta[static_cast<std::size_t>(m)][ui] = wrap_phase(theta);
        }
    }
    return est;
}

PairEvidence pair_evidence(const FreqFrame& frame, const ToneMap& tones, const ChannelKnowledge& channel,
                           const PhaseEstimate& phases, double sigma_w2, const Constellation& constellation)
{
    if (phases.m_symbols() != frame.m_symbols())
        throw std::invalid_argument("pair_evidence: phase estimate does not cover the frame");
    if (!(sigma_w2 > 0.0)) throw std::invalid_argument("pair_evidence: sigma_w2 must be positive");

    const int q = constellation.size();
    const int n_data = static_cast<int>(tones.data_tones.size());
    PairEvidence evidence(frame.m_symbols() * n_data, q);
    std::vector<double> log_table(static_cast<std::size_t>(q * q));

    for (int m = 0; m < frame.m_symbols(); ++m) {
        const cplx rot_a = std::polar(1.0, phases.at(m, Node::a));
        const cplx rot_b = std::polar(1.0, phases.at(m, Node::b));
        for (int d = 0; d < n_data; ++d) {
            const auto tone = static_cast<std::size_t>(tones.data_tones[static_cast<std::size_t>(d)]);
            const cplx r = frame.at(m, static_cast<int>(tone));
            const cplx ga = rot_a * channel.h_a[tone];
            const cplx gb = rot_b * channel.h_b[tone];

            double peak = -std::numeric_limits<double>::infinity();
            for (int la = 0; la < q; ++la) {
                const cplx residual_a = r - ga * constellation.point(la);
                for (int lb = 0; lb < q; ++lb) {
                    const double v = -std::norm(residual_a - gb * constellation.point(lb)) / sigma_w2;
                    log_table[static_cast<std::size_t>(la * q + lb)] = v;
                    peak = std::max(peak, v);
                }
            }
            auto table = evidence.tone(m * n_data + d);
            double sum = 0.0;
            for (std::size_t e = 0; e < table.size(); ++e) sum += table[e] = std::exp(log_table[e] - peak);
            for (double& v : table) v /= sum;
        }
    }
    return evidence;
}

SymbolObjective::SymbolObjective(std::span<const cplx> received, const ToneMap& tones,
                                 const ChannelKnowledge& channel, const Constellation& constellation,
                                 std::span<const double> data_posteriors, int m)
{
    const int q = constellation.size();
    const auto alphabet = static_cast<std::size_t>(q * q);
    if (data_posteriors.size() != tones.data_tones.size() * alphabet)
        throw std::invalid_argument("SymbolObjective: posterior size does not match the data tones");

    for (std::size_t d = 0; d < tones.data_tones.size(); ++d) {
        const auto tone = static_cast<std::size_t>(tones.data_tones[d]);
        const cplx r = received[tone];
        for (int la = 0; la < q; ++la)
            for (int lb = 0; lb < q; ++lb) {
                const double p = data_posteriors[d * alphabet + static_cast<std::size_t>(la * q + lb)];
                if (p == 0.0) continue;
                add(r, constellation.point(la) * channel.h_a[tone], constellation.point(lb) * channel.h_b[tone], p);
            }
    }
    for (const Node u : {Node::a, Node::b})
        for (const int tone : tones.pilots(u)) {
            const auto t = static_cast<std::size_t>(tone);
            const cplx g = tones.pilot_value(u, m, tone) * channel.h(u)[t];
            add(received[t], u == Node::a ? g : cplx{}, u == Node::b ? g : cplx{}, 1.0);
        }
}

// |r - a e^{jA} - b e^{jB}|^2 = |r|^2 + |a|^2 + |b|^2
//     - 2 Re(r* a e^{jA}) - 2 Re(r* b e^{jB}) + 2 Re(a b* e^{j(A-B)})
void SymbolObjective::add(cplx r, cplx a, cplx b, double weight)
{
    constant_ += weight * (std::norm(r) + std::norm(a) + std::norm(b));
    corr_a_ += weight * std::conj(r) * a;
    corr_b_ += weight * std::conj(r) * b;
    cross_ += weight * a * std::conj(b);
}

double SymbolObjective::operator()(double theta_a, double theta_b) const
{
    const cplx ea = std::polar(1.0, theta_a);
    const cplx eb = std::polar(1.0, theta_b);
    const double quad = constant_ - 2.0 * std::real(corr_a_ * ea) - 2.0 * std::real(corr_b_ * eb)
                        + 2.0 * std::real(cross_ * ea * std::conj(eb));
    return -quad;
}

double q_function(const std::array<double, 2>& theta, std::span<const cplx> received, const ToneMap& tones,
                  const ChannelKnowledge& channel, const Constellation& constellation,
                  std::span<const double> data_posteriors, int m)
{
    return SymbolObjective(received, tones, channel, constellation, data_posteriors, m)(theta);
}

MStepResult particle_m_step(const SymbolObjective& objective, const std::array<double, 2>& previous,
                            const ParticleConfig& config, double temperature)
{
    config.validate();
    if (!(temperature > 0.0)) throw std::invalid_argument("particle_m_step: temperature must be positive");

    const int l = config.grid;
    const double step = kTwoPi / l;
    std::vector<std::array<double, 2>> particles;
    particles.reserve(static_cast<std::size_t>(l * l));
    for (int p = 0; p < l; ++p)
        for (int q = 0; q < l; ++q) particles.push_back({p * step, q * step});

    std::vector<double> values(particles.size());
    auto evaluate = [&]() -> std::size_t {
        std::size_t best = 0;
        for (std::size_t k = 0; k < particles.size(); ++k) {
            values[k] = objective(particles[k]);
            if (values[k] > values[best]) best = k;
        }
        return best;
    };
    auto all_finite = [&] { return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); }); };

    const bool contract = config.shrink == ShrinkRule::contract;
    std::size_t best = evaluate();
    if (!all_finite()) return {previous, true};
    const auto grid_best = particles[best];
    const double grid_best_value = values[best];

    for (int round = 1; round <= config.rounds; ++round) {
        if (round > 1) {
            best = evaluate();
            if (!all_finite()) return {previous, true};
        }
        const double peak = values[best];
        const auto ref = particles[best];
        double total = 0.0;
        std::array<double, 2> offset{0.0, 0.0};
        for (std::size_t k = 0; k < particles.size(); ++k) {
            const double w = std::exp((values[k] - peak) / temperature);
            total += w;
            for (std::size_t u = 0; u < 2; ++u)
                offset[u] += w * (contract ? wrap_signed(particles[k][u] - ref[u]) : particles[k][u]);
        }
        if (!(total > 0.0) || !std::isfinite(total)) return {previous, true};

        const double eps = config.forgetting;
        for (std::size_t u = 0; u < 2; ++u) {
            const double mean = contract ? ref[u] + offset[u] / total : offset[u] / total;
            for (auto& particle : particles)
                particle[u] = contract ? mean + eps * wrap_signed(particle[u] - mean)
                                       : (1.0 - eps) * particle[u] + eps * mean;
        }
    }

    if (config.rounds > 0) {
        best = evaluate();
        if (!all_finite()) return {previous, true};
    }
    auto theta = particles[best];
    if (config.keep_grid_argmax && grid_best_value >= values[best]) theta = grid_best;
    return {{wrap_phase(theta[0]), wrap_phase(theta[1])}, false};
}

Bits pnc_map(std::span<const PairBitTable> pair_bits)
{
    Bits out;
    out.reserve(pair_bits.size());
    for (const auto& p : pair_bits) {
        const double same = p[0] + p[3];
        const double differ = p[1] + p[2];
        out.push_back(differ > same ? 1 : 0);
    }
    return out;
}

EmBpResult em_bp_receive(const FreqFrame& frame, const ChannelKnowledge& channel, const ReceiverContext& ctx,
                         const ReceiverConfig& config)
{
    config.validate();
    if (frame.m_symbols() != ctx.frame.m_symbols || frame.n_fft() != ctx.frame.n_fft)
        throw std::invalid_argument("em_bp_receive: frame dimensions do not match the configuration");

    const BpOptions bp{config.bp_inner_iters, config.messages};
    const int bps = ctx.constellation.bits_per_symbol();
    const auto per_symbol = ctx.tones.data_tones.size() * static_cast<std::size_t>(ctx.constellation.size() * ctx.constellation.size());

    EmBpResult result;
    PhaseEstimate phases = ls_pilot_phase(frame, ctx.tones, channel, config.literal_ls);
    for (int k = 0;; ++k) {
        const auto evidence = pair_evidence(frame, ctx.tones, channel, phases, config.sigma_w2, ctx.constellation);
        result.posterior = bp_decode(evidence, ctx.code, bps, bp);
        result.xor_bits = pnc_map(result.posterior.info_bits);
        result.snapshots.push_back({phases, result.xor_bits});
        if (k == config.em_iters) break;

        PhaseEstimate next = phases;
        next.iteration = k + 1;
        for (int m = 0; m < frame.m_symbols(); ++m) {
            const std::span<const double> post(result.posterior.symbol_table.data() + static_cast<std::ptrdiff_t>(m) * static_cast<std::ptrdiff_t>(per_symbol),
                                               per_symbol);
            const SymbolObjective objective(frame.row(m), ctx.tones, channel, ctx.constellation, post, m);
            next.theta[static_cast<std::size_t>(m)] =
                particle_m_step(objective, phases.theta[static_cast<std::size_t>(m)], config.particle, config.sigma_w2).theta;
        }
        phases = std::move(next);
    }
    result.phases = phases;
    return result;
}

EmBpResult baseline_receive(const FreqFrame& frame, const ChannelKnowledge& channel, const ReceiverContext& ctx,
                            const ReceiverConfig& config)
{
    ReceiverConfig pilot_only = config;
    pilot_only.em_iters = 0;
    return em_bp_receive(frame, channel, ctx, pilot_only);
}

}  // namespace pnc
