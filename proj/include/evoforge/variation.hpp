// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "evoforge/genome.hpp"
#include "evoforge/rng.hpp"
#include "evoforge/weights.hpp"

namespace evoforge {

enum class MutationKind : std::uint8_t {
    SplitEdge,
    AddEdge,
    EnableEdge,
    AddRecurrentEdge,
    DisableEdge,
    DisableNode,
    EnableNode,
    AddNode,
    SplitNode,
    MergeNode,
};

inline constexpr std::array<MutationKind, 10> kAllMutationKinds = {
    MutationKind::SplitEdge,   MutationKind::AddEdge,  MutationKind::EnableEdge, MutationKind::AddRecurrentEdge,
    MutationKind::DisableEdge, MutationKind::DisableNode, MutationKind::EnableNode, MutationKind::AddNode,
    MutationKind::SplitNode,   MutationKind::MergeNode};

std::string_view to_string(MutationKind kind);
std::optional<MutationKind> mutation_kind_from_string(std::string_view name);

struct VariationConfig {
    /// Indexed by MutationKind. Split edge is off by default.
    std::array<bool, 10> enabled{false, true, true, true, true, true, true, true, true, true};
    int max_new_fan = 3;
    int retry_bound = 16;
    int max_time_skip = 10;

    bool is_enabled(MutationKind k) const { return enabled[static_cast<std::size_t>(k)]; }
    void set_enabled(MutationKind k, bool on) { enabled[static_cast<std::size_t>(k)] = on; }
};

/// Whether the operator's structural precondition holds on `g`.
bool is_applicable(const Genome &g, MutationKind kind, const VariationConfig &cfg);

/// Enabled kinds whose preconditions hold on `g`, in declaration order.
std::vector<MutationKind> applicable_kinds(const Genome &g, const VariationConfig &cfg);

/// Applies one operator to a copy of `parent`. Inherited genes keep their
/// weights; new genes are drawn by the policy's mutation rule. Returns
/// nullopt when the operator is inapplicable to this parent.
std::optional<Genome> mutate(const Genome &parent, MutationKind kind, const WeightPolicy &policy,
                             const VariationConfig &cfg, InnovationCounter &counter, Rng &rng);

struct MutationOutcome {
    Genome child;
    /// Empty when every draw was inapplicable and the parent was cloned.
    std::optional<MutationKind> applied;
};

/// Draws kinds uniformly over the enabled set, redrawing inapplicable ones up
/// to `cfg.retry_bound` times before falling back to a clone.
MutationOutcome mutate_random(const Genome &parent, const WeightPolicy &policy, const VariationConfig &cfg,
                              InnovationCounter &counter, Rng &rng);

/// Orders two evaluated parents as (better, worse): lower fitness first, ties
/// broken by lower generation_id. Throws MissingFitnessError for untrained parents.
std::pair<const Genome *, const Genome *> order_parents(const Genome &a, const Genome &b);

/// Gene-aligned recombination with a caller-supplied line-search coefficient.
/// Under a Lamarckian crossover rule shared genes blend and single-parent genes
/// are copied; otherwise the child's weights are redrawn with the initial rule.
Genome recombine(const Genome &better, const Genome &worse, const WeightPolicy &policy, double r, Rng &rng);

/// Orders the parents, draws one r and recombines.
Genome crossover(const Genome &a, const Genome &b, const WeightPolicy &policy, Rng &rng);

} // namespace evoforge
