// SPDX-License-Identifier: Apache-2.0
#include "evoforge/genome.hpp"

#include <algorithm>
#include <set>
#include <tuple>
#include <unordered_set>

#include "evoforge/error.hpp"

namespace evoforge {

namespace {

template <typename Vec> auto find_by_innovation(Vec &genes, Innovation id) -> decltype(&genes.front()) {
    auto it = std::lower_bound(genes.begin(), genes.end(), id,
                               [](const auto &gene, Innovation v) { return gene.innovation < v; });
    if (it == genes.end() || it->innovation != id) return nullptr;
    return &*it;
}

template <typename Vec> void sort_by_innovation(Vec &genes) {
    std::sort(genes.begin(), genes.end(), [](const auto &a, const auto &b) { return a.innovation < b.innovation; });
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t &h, std::uint64_t value, int bytes) {
    for (int i = 0; i < bytes; ++i) {
        h ^= (value >> (8 * i)) & 0xFF;
        h *= kFnvPrime;
    }
}

} // namespace

std::string_view to_string(NodeType type) {
    switch (type) {
    case NodeType::Input: return "input";
    case NodeType::Output: return "output";
    case NodeType::Simple: return "simple";
    case NodeType::Delta: return "delta";
    case NodeType::GRU: return "gru";
    case NodeType::LSTM: return "lstm";
    case NodeType::MGU: return "mgu";
    case NodeType::UGRNN: return "ugrnn";
    }
    return "unknown";
}

std::optional<NodeType> node_type_from_string(std::string_view name) {
    for (auto t : {NodeType::Input, NodeType::Output, NodeType::Simple, NodeType::Delta, NodeType::GRU,
                   NodeType::LSTM, NodeType::MGU, NodeType::UGRNN}) {
        if (to_string(t) == name) return t;
    }
    return std::nullopt;
}

const NodeGene *Genome::find_node(Innovation id) const { return find_by_innovation(nodes, id); }
NodeGene *Genome::find_node(Innovation id) { return find_by_innovation(nodes, id); }
const EdgeGene *Genome::find_edge(Innovation id) const { return find_by_innovation(edges, id); }
const RecurrentEdgeGene *Genome::find_rec_edge(Innovation id) const { return find_by_innovation(rec_edges, id); }

bool Genome::has_edge_between(Innovation source, Innovation target) const {
    return std::any_of(edges.begin(), edges.end(),
                       [&](const EdgeGene &e) { return e.source == source && e.target == target; });
}

bool Genome::has_rec_edge(Innovation source, Innovation target, std::uint16_t skip) const {
    return std::any_of(rec_edges.begin(), rec_edges.end(), [&](const RecurrentEdgeGene &e) {
        return e.source == source && e.target == target && e.time_skip == skip;
    });
}

std::size_t Genome::input_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const NodeGene &n) { return n.type == NodeType::Input; }));
}

std::size_t Genome::output_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const NodeGene &n) { return n.type == NodeType::Output; }));
}

std::vector<Innovation> Genome::input_ids() const {
    std::vector<Innovation> ids;
    for (const auto &n : nodes)
        if (n.type == NodeType::Input) ids.push_back(n.innovation);
    return ids;
}

std::vector<Innovation> Genome::output_ids() const {
    std::vector<Innovation> ids;
    for (const auto &n : nodes)
        if (n.type == NodeType::Output) ids.push_back(n.innovation);
    return ids;
}

bool Genome::node_enabled(Innovation id) const {
    const NodeGene *n = find_node(id);
    return n != nullptr && n->enabled;
}

bool Genome::edge_usable(const EdgeGene &e) const {
    return e.enabled && node_enabled(e.source) && node_enabled(e.target);
}

bool Genome::rec_edge_usable(const RecurrentEdgeGene &e) const {
    return e.enabled && node_enabled(e.source) && node_enabled(e.target);
}

GeneCounts Genome::enabled_counts() const {
    GeneCounts c;
    for (const auto &n : nodes) {
        if (!n.enabled) continue;
        ++c.nodes;
        if (is_hidden(n.type)) ++c.hidden;
    }
    for (const auto &e : edges)
        if (edge_usable(e)) ++c.edges;
    for (const auto &e : rec_edges)
        if (rec_edge_usable(e)) ++c.rec_edges;
    return c;
}

std::size_t Genome::parameter_count() const {
    std::size_t n = edges.size() + rec_edges.size();
    for (const auto &node : nodes) n += node.params.size();
    return n;
}

void Genome::sort_genes() {
    sort_by_innovation(nodes);
    sort_by_innovation(edges);
    sort_by_innovation(rec_edges);
}

void Genome::clear_evaluation() {
    fitness.reset();
    mae.reset();
    diverged = false;
}

std::string Genome::check_invariants() const {
    std::unordered_set<Innovation> node_ids;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const NodeGene &n = nodes[i];
        if (n.innovation == 0) return "node with innovation 0";
        if (i > 0 && nodes[i - 1].innovation >= n.innovation) return "node genes not strictly sorted by innovation";
        node_ids.insert(n.innovation);
        if (n.params.size() != param_count(n.type))
            return "node " + std::to_string(n.innovation) + " has wrong parameter block length";
        if (n.type == NodeType::Input && n.depth != 0.0) return "input node depth is not 0";
        if (n.type == NodeType::Output && n.depth != 1.0) return "output node depth is not 1";
        if (is_hidden(n.type) && !(n.depth > 0.0 && n.depth < 1.0))
            return "hidden node " + std::to_string(n.innovation) + " depth outside (0,1)";
        if (!is_hidden(n.type) && !n.enabled) return "input/output node disabled";
    }

    std::unordered_set<Innovation> edge_ids;
    std::set<std::pair<Innovation, Innovation>> pairs;
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const EdgeGene &e = edges[i];
        if (i > 0 && edges[i - 1].innovation >= e.innovation) return "edge genes not strictly sorted by innovation";
        if (!edge_ids.insert(e.innovation).second) return "duplicate edge innovation";
        const NodeGene *s = find_node(e.source);
        const NodeGene *t = find_node(e.target);
        if (s == nullptr || t == nullptr) return "edge " + std::to_string(e.innovation) + " references missing node";
        if (!(s->depth < t->depth)) return "edge " + std::to_string(e.innovation) + " violates depth order";
        if (!pairs.emplace(e.source, e.target).second) return "duplicate feed-forward edge between node pair";
    }

    std::set<std::tuple<Innovation, Innovation, std::uint16_t>> triples;
    for (std::size_t i = 0; i < rec_edges.size(); ++i) {
        const RecurrentEdgeGene &e = rec_edges[i];
        if (i > 0 && rec_edges[i - 1].innovation >= e.innovation)
            return "recurrent edge genes not strictly sorted by innovation";
        if (!edge_ids.insert(e.innovation).second) return "recurrent edge shares an innovation with another edge";
        if (find_node(e.source) == nullptr || find_node(e.target) == nullptr)
            return "recurrent edge " + std::to_string(e.innovation) + " references missing node";
        if (e.time_skip < 1) return "recurrent edge with time skip 0";
        if (!triples.emplace(e.source, e.target, e.time_skip).second) return "duplicate recurrent edge triple";
    }

    if (fitness.has_value() == false && mae.has_value()) return "mae present without fitness";
    return {};
}

Genome seed_genome(std::size_t n_inputs, std::size_t n_outputs, InnovationCounter &counter) {
    if (n_inputs == 0 || n_outputs == 0)
        throw DimensionError("seed genome needs at least one input and one output (got " + std::to_string(n_inputs) +
                             ", " + std::to_string(n_outputs) + ")");
    Genome g;
    std::vector<Innovation> inputs, outputs;
    for (std::size_t i = 0; i < n_inputs; ++i) {
        inputs.push_back(counter.next_node());
        g.nodes.push_back({inputs.back(), NodeType::Input, 0.0, true, {}});
    }
    for (std::size_t i = 0; i < n_outputs; ++i) {
        outputs.push_back(counter.next_node());
        g.nodes.push_back({outputs.back(), NodeType::Output, 1.0, true,
                           std::vector<double>(param_count(NodeType::Output), 0.0)});
    }
    for (Innovation in : inputs)
        for (Innovation out : outputs) g.edges.push_back({counter.next_edge(), in, out, 0.0, true});
    g.sort_genes();
    return g;
}

std::uint64_t structural_hash(const Genome &g) {
    std::uint64_t h = kFnvOffset;
    auto mix_gene = [&](std::uint8_t tag, Innovation id, bool enabled) {
        fnv_mix(h, tag, 1);
        fnv_mix(h, id, 4);
        fnv_mix(h, enabled ? 1 : 0, 1);
    };
    for (const auto &n : g.nodes) mix_gene(1, n.innovation, n.enabled);
    for (const auto &e : g.edges) mix_gene(2, e.innovation, e.enabled);
    for (const auto &e : g.rec_edges) mix_gene(3, e.innovation, e.enabled);
    return h;
}

} // namespace evoforge
