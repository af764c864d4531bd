// SPDX-License-Identifier: Apache-2.0
//
// Weight initialization and inheritance strategies.
//
// A strategy is a triple (initial, crossover, mutation). The initial rule
// draws weights for genomes with no trained ancestry; crossover and mutation
// either reuse the initial rule or inherit from trained parents:
//
//   crossover:  w_child = r * (w_worse - w_better) + w_better,  r ~ U[-0.5, 1.5]
//               with one r per crossover event
//   mutation:   new components ~ N(mu_parent, sigma2_parent)
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "evoforge/genome.hpp"
#include "evoforge/rng.hpp"

namespace evoforge {

enum class InitialStrategy { UniformRandom, Xavier, Kaiming };
enum class InheritStrategy { SameAsInitial, Lamarckian };

struct WeightStrategy {
    InitialStrategy initial = InitialStrategy::Xavier;
    InheritStrategy crossover = InheritStrategy::Lamarckian;
    InheritStrategy mutation = InheritStrategy::Lamarckian;

    /// Parses `<initial>-<crossover>-<mutation>` codes such as `K-L-L` or `X-X-X`.
    /// The crossover/mutation letter is either `L` or the initial letter.
    static std::optional<WeightStrategy> parse(std::string_view code);
    std::string code() const;

    bool operator==(const WeightStrategy &) const = default;
};

char initial_letter(InitialStrategy s);

struct WeightConfig {
    double uniform_lo = -0.5;
    double uniform_hi = 0.5;
    /// Use sqrt(2 / fan_in) instead of sqrt(2) / fan_in for Kaiming.
    bool kaiming_canonical = false;
    /// Added to freshly initialized LSTM forget-gate biases.
    double forget_bias_offset = 1.0;
};

struct WeightPolicy {
    WeightStrategy strategy;
    WeightConfig config;
};

struct FanCounts {
    int fan_in = 0;
    int fan_out = 0;
};

struct WeightStats {
    double mu = 0.0;
    double sigma2 = 0.0;
};

double xavier_bound(FanCounts fans);
double xavier_sample(FanCounts fans, Rng &rng);

double kaiming_scale(FanCounts fans, bool canonical = false);
double kaiming_sample(FanCounts fans, Rng &rng, bool canonical = false);

double uniform_sample(double lo, double hi, Rng &rng);

/// Line-search coefficient, drawn once per crossover event.
double crossover_r(Rng &rng);

constexpr double lamarckian_blend(double w_better, double w_worse, double r) noexcept {
    return r * (w_worse - w_better) + w_better;
}

/// Mean and population variance over every node parameter and edge weight,
/// enabled or not. Throws EmptyGenomeError when there are none.
WeightStats weight_stats(const Genome &g);
WeightStats weight_stats(std::span<const double> values);

/// N(mu, sigma2); returns mu exactly when sigma2 == 0.
double lamarckian_mutation_sample(WeightStats stats, Rng &rng);

/// Usable in/out connection counts (feed-forward plus recurrent) at a node.
FanCounts fan_counts(const Genome &g, Innovation node);

/// Substitutes one input for nodes whose connections are all disabled, where
/// the rule's bound would otherwise be undefined.
FanCounts clamp_fans(InitialStrategy strategy, FanCounts fans);

/// One draw from the initial rule for a component attached to a node with the given fans.
double sample_initial(InitialStrategy strategy, FanCounts fans, const WeightConfig &cfg, Rng &rng);

/// Fresh parameter block for a node under the initial rule, including the
/// LSTM forget-gate offset. Fan counts of zero are treated as one.
void initialize_node_params(NodeGene &node, FanCounts fans, InitialStrategy strategy, const WeightConfig &cfg,
                            Rng &rng);

/// Redraws every node parameter and edge weight with the initial rule. Edge
/// weights use the fans of the edge's target node.
Genome initialize_genome_weights(Genome g, InitialStrategy strategy, const WeightConfig &cfg, Rng &rng);

} // namespace evoforge
