// SPDX-License-Identifier: Apache-2.0
#include "evoforge/weights.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "evoforge/cells.hpp"
#include "evoforge/error.hpp"

namespace evoforge {

namespace {

std::optional<InitialStrategy> initial_from_letter(char c) {
    switch (c) {
    case 'R': return InitialStrategy::UniformRandom;
    case 'X': return InitialStrategy::Xavier;
    case 'K': return InitialStrategy::Kaiming;
    default: return std::nullopt;
    }
}

} // namespace

FanCounts clamp_fans(InitialStrategy strategy, FanCounts f) {
    if (strategy == InitialStrategy::Kaiming && f.fan_in <= 0) f.fan_in = 1;
    if (strategy == InitialStrategy::Xavier && f.fan_in + f.fan_out <= 0) f.fan_in = 1;
    return f;
}

char initial_letter(InitialStrategy s) {
    switch (s) {
    case InitialStrategy::UniformRandom: return 'R';
    case InitialStrategy::Xavier: return 'X';
    case InitialStrategy::Kaiming: return 'K';
    }
    return '?';
}

std::optional<WeightStrategy> WeightStrategy::parse(std::string_view code) {
    if (code.size() != 5 || code[1] != '-' || code[3] != '-') return std::nullopt;
    auto initial = initial_from_letter(code[0]);
    if (!initial) return std::nullopt;
    auto inherit = [&](char c) -> std::optional<InheritStrategy> {
        if (c == 'L') return InheritStrategy::Lamarckian;
        if (c == code[0]) return InheritStrategy::SameAsInitial;
        return std::nullopt;
    };
    auto crossover = inherit(code[2]);
    auto mutation = inherit(code[4]);
    if (!crossover || !mutation) return std::nullopt;
    return WeightStrategy{*initial, *crossover, *mutation};
}

std::string WeightStrategy::code() const {
    char i = initial_letter(initial);
    auto letter = [&](InheritStrategy s) { return s == InheritStrategy::Lamarckian ? 'L' : i; };
    return {i, '-', letter(crossover), '-', letter(mutation)};
}

double xavier_bound(FanCounts fans) {
    int sum = fans.fan_in + fans.fan_out;
    if (fans.fan_in < 0 || fans.fan_out < 0 || sum <= 0)
        throw DegenerateFanError("xavier needs fan_in + fan_out >= 1");
    return std::sqrt(6.0) / std::sqrt(static_cast<double>(sum));
}

double xavier_sample(FanCounts fans, Rng &rng) {
    double b = xavier_bound(fans);
    return std::uniform_real_distribution<double>(-b, b)(rng);
}

double kaiming_scale(FanCounts fans, bool canonical) {
    if (fans.fan_in <= 0) throw DegenerateFanError("kaiming needs fan_in >= 1");
    double f = static_cast<double>(fans.fan_in);
    return canonical ? std::sqrt(2.0 / f) : std::sqrt(2.0) / f;
}

double kaiming_sample(FanCounts fans, Rng &rng, bool canonical) {
    double scale = kaiming_scale(fans, canonical);
    return std::normal_distribution<double>(0.0, 1.0)(rng) * scale;
}

double uniform_sample(double lo, double hi, Rng &rng) {
    if (!(lo < hi)) throw ConfigError("uniform_range", "lower bound must be below upper bound");
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double crossover_r(Rng &rng) { return std::uniform_real_distribution<double>(-0.5, 1.5)(rng); }

WeightStats weight_stats(std::span<const double> values) {
    if (values.empty()) throw EmptyGenomeError("weight statistics need at least one parameter");
    double sum = 0.0;
    for (double v : values) sum += v;
    double mu = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mu) * (v - mu);
    return {mu, ss / static_cast<double>(values.size())};
}

WeightStats weight_stats(const Genome &g) {
    std::vector<double> values;
    values.reserve(g.parameter_count());
    for (const auto &n : g.nodes) values.insert(values.end(), n.params.begin(), n.params.end());
    for (const auto &e : g.edges) values.push_back(e.weight);
    for (const auto &e : g.rec_edges) values.push_back(e.weight);
    return weight_stats(values);
}

double lamarckian_mutation_sample(WeightStats stats, Rng &rng) {
    if (stats.sigma2 <= 0.0) return stats.mu;
    return std::normal_distribution<double>(stats.mu, std::sqrt(stats.sigma2))(rng);
}

FanCounts fan_counts(const Genome &g, Innovation node) {
    FanCounts f;
    for (const auto &e : g.edges) {
        if (!g.edge_usable(e)) continue;
        if (e.target == node) ++f.fan_in;
        if (e.source == node) ++f.fan_out;
    }
    for (const auto &e : g.rec_edges) {
        if (!g.rec_edge_usable(e)) continue;
        if (e.target == node) ++f.fan_in;
        if (e.source == node) ++f.fan_out;
    }
    return f;
}

double sample_initial(InitialStrategy strategy, FanCounts fans, const WeightConfig &cfg, Rng &rng) {
    switch (strategy) {
    case InitialStrategy::UniformRandom: return uniform_sample(cfg.uniform_lo, cfg.uniform_hi, rng);
    case InitialStrategy::Xavier: return xavier_sample(fans, rng);
    case InitialStrategy::Kaiming: return kaiming_sample(fans, rng, cfg.kaiming_canonical);
    }
    return 0.0;
}

void initialize_node_params(NodeGene &node, FanCounts fans, InitialStrategy strategy, const WeightConfig &cfg,
                            Rng &rng) {
    fans = clamp_fans(strategy, fans);
    node.params.resize(param_count(node.type));
    for (double &p : node.params) p = sample_initial(strategy, fans, cfg, rng);
    if (node.type == NodeType::LSTM) node.params[kLstmForgetBiasSlot] += cfg.forget_bias_offset;
}

Genome initialize_genome_weights(Genome g, InitialStrategy strategy, const WeightConfig &cfg, Rng &rng) {
    std::vector<FanCounts> fans;
    fans.reserve(g.nodes.size());
    for (const auto &n : g.nodes) fans.push_back(fan_counts(g, n.innovation));
    auto fans_of = [&](Innovation id) {
        const NodeGene *n = g.find_node(id);
        return clamp_fans(strategy, fans[static_cast<std::size_t>(n - g.nodes.data())]);
    };

    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        if (g.nodes[i].params.empty()) continue;
        initialize_node_params(g.nodes[i], fans[i], strategy, cfg, rng);
    }
    for (auto &e : g.edges) e.weight = sample_initial(strategy, fans_of(e.target), cfg, rng);
    for (auto &e : g.rec_edges) e.weight = sample_initial(strategy, fans_of(e.target), cfg, rng);
    g.clear_evaluation();
    return g;
}

} // namespace evoforge
