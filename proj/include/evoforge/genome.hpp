// SPDX-License-Identifier: Apache-2.0
//
// Direct-encoded recurrent network genome: every node, feed-forward edge and
// recurrent edge is an explicit gene carrying a globally unique innovation
// number. Genes are kept sorted by innovation so that two genomes can be
// aligned gene-by-gene for crossover.
#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evoforge {

using Innovation = std::uint32_t;

enum class NodeType : std::uint8_t {
    Input = 0,
    Output = 1,
    Simple = 2,
    Delta = 3,
    GRU = 4,
    LSTM = 5,
    MGU = 6,
    UGRNN = 7,
};

/// The six node types that mutation may create.
inline constexpr std::array<NodeType, 6> kHiddenNodeTypes = {
    NodeType::Simple, NodeType::Delta, NodeType::GRU, NodeType::LSTM, NodeType::MGU, NodeType::UGRNN};

std::string_view to_string(NodeType type);
std::optional<NodeType> node_type_from_string(std::string_view name);

constexpr bool is_hidden(NodeType t) noexcept { return t != NodeType::Input && t != NodeType::Output; }

/// Length of the trainable parameter block a node of this type carries.
constexpr std::size_t param_count(NodeType t) noexcept {
    switch (t) {
    case NodeType::Input: return 0;
    case NodeType::Output: return 1;
    case NodeType::Simple: return 1;
    case NodeType::Delta: return 6;
    case NodeType::GRU: return 9;
    case NodeType::LSTM: return 12;
    case NodeType::MGU: return 6;
    case NodeType::UGRNN: return 6;
    }
    return 0;
}

struct NodeGene {
    Innovation innovation = 0;
    NodeType type = NodeType::Simple;
    double depth = 0.0;
    bool enabled = true;
    /// Bias and gate parameters; layout per type is documented in cells.hpp.
    std::vector<double> params;

    bool operator==(const NodeGene &) const = default;
};

struct EdgeGene {
    Innovation innovation = 0;
    Innovation source = 0;
    Innovation target = 0;
    double weight = 0.0;
    bool enabled = true;

    bool operator==(const EdgeGene &) const = default;
};

struct RecurrentEdgeGene {
    Innovation innovation = 0;
    Innovation source = 0;
    Innovation target = 0;
    std::uint16_t time_skip = 1;
    double weight = 0.0;
    bool enabled = true;

    bool operator==(const RecurrentEdgeGene &) const = default;
};

/// Shared monotone source of innovation numbers. Node and edge numbers are
/// drawn from separate sequences; recurrent edges share the edge sequence.
class InnovationCounter {
  public:
    InnovationCounter() = default;
    InnovationCounter(Innovation next_node, Innovation next_edge) : next_node_(next_node), next_edge_(next_edge) {}
    InnovationCounter(const InnovationCounter &) = delete;
    InnovationCounter &operator=(const InnovationCounter &) = delete;

    Innovation next_node() noexcept { return next_node_.fetch_add(1, std::memory_order_relaxed); }
    Innovation next_edge() noexcept { return next_edge_.fetch_add(1, std::memory_order_relaxed); }

    Innovation peek_node() const noexcept { return next_node_.load(std::memory_order_relaxed); }
    Innovation peek_edge() const noexcept { return next_edge_.load(std::memory_order_relaxed); }

  private:
    std::atomic<Innovation> next_node_{1};
    std::atomic<Innovation> next_edge_{1};
};

struct GeneCounts {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t rec_edges = 0;
    std::size_t hidden = 0;

    bool operator==(const GeneCounts &) const = default;
};

class Genome {
  public:
    std::vector<NodeGene> nodes;              // sorted by innovation
    std::vector<EdgeGene> edges;              // sorted by innovation
    std::vector<RecurrentEdgeGene> rec_edges; // sorted by innovation

    /// Validation MSE after training; empty until evaluated.
    std::optional<double> fitness;
    /// Validation MAE recorded alongside fitness for reporting.
    std::optional<double> mae;
    bool diverged = false;
    std::int64_t generation_id = -1;
    std::int32_t island_of_origin = -1;

    const NodeGene *find_node(Innovation id) const;
    NodeGene *find_node(Innovation id);
    const EdgeGene *find_edge(Innovation id) const;
    const RecurrentEdgeGene *find_rec_edge(Innovation id) const;

    bool has_edge_between(Innovation source, Innovation target) const;
    bool has_rec_edge(Innovation source, Innovation target, std::uint16_t skip) const;

    std::size_t input_count() const;
    std::size_t output_count() const;
    /// Input node innovations in column order (ascending innovation).
    std::vector<Innovation> input_ids() const;
    std::vector<Innovation> output_ids() const;

    /// A connection is usable when it and both of its endpoint nodes are enabled.
    bool node_enabled(Innovation id) const;
    bool edge_usable(const EdgeGene &e) const;
    bool rec_edge_usable(const RecurrentEdgeGene &e) const;

    /// Counts of enabled nodes (including inputs/outputs), usable edges and recurrent edges.
    GeneCounts enabled_counts() const;

    /// Total number of trainable scalars (node params plus every edge weight).
    std::size_t parameter_count() const;

    /// Restores innovation ordering after genes were appended.
    void sort_genes();

    /// Drops evaluation results; used when a genome is derived from another.
    void clear_evaluation();

    /// Empty string when every structural invariant holds, otherwise a description of the first violation.
    std::string check_invariants() const;

    bool operator==(const Genome &) const = default;
};

/// Fully connected input->output genome with no hidden nodes and all weights zero.
Genome seed_genome(std::size_t n_inputs, std::size_t n_outputs, InnovationCounter &counter);

/// Digest over (gene kind, innovation, enabled) of every gene; ignores weights and fitness.
std::uint64_t structural_hash(const Genome &g);

} // namespace evoforge
