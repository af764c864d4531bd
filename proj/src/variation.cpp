// SPDX-License-Identifier: Apache-2.0
#include "evoforge/variation.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "evoforge/error.hpp"

namespace evoforge {

namespace {

struct Connection {
    bool recurrent = false;
    std::size_t index = 0; // into edges / rec_edges
};

/// Genes created by one mutation, in creation order.
struct NewGenes {
    std::vector<Innovation> nodes;
    std::vector<Innovation> edges;
    std::vector<Innovation> rec_edges;
};

NodeType random_hidden_type(Rng &rng) { return kHiddenNodeTypes[pick_index(rng, kHiddenNodeTypes.size())]; }

std::vector<const NodeGene *> enabled_nodes(const Genome &g) {
    std::vector<const NodeGene *> out;
    for (const auto &n : g.nodes)
        if (n.enabled) out.push_back(&n);
    return out;
}

std::vector<Innovation> hidden_nodes(const Genome &g, bool enabled) {
    std::vector<Innovation> out;
    for (const auto &n : g.nodes)
        if (is_hidden(n.type) && n.enabled == enabled) out.push_back(n.innovation);
    return out;
}

std::vector<std::pair<Innovation, Innovation>> add_edge_candidates(const Genome &g) {
    std::set<std::pair<Innovation, Innovation>> existing;
    for (const auto &e : g.edges) existing.emplace(e.source, e.target);
    auto nodes = enabled_nodes(g);
    std::vector<std::pair<Innovation, Innovation>> out;
    for (const NodeGene *a : nodes)
        for (const NodeGene *b : nodes)
            if (a->depth < b->depth && !existing.count({a->innovation, b->innovation}))
                out.emplace_back(a->innovation, b->innovation);
    return out;
}

struct RecCandidate {
    Innovation source;
    Innovation target;
    std::vector<std::uint16_t> free_skips;
};

std::vector<RecCandidate> add_rec_edge_candidates(const Genome &g, int max_skip) {
    std::set<std::tuple<Innovation, Innovation, std::uint16_t>> existing;
    for (const auto &e : g.rec_edges) existing.emplace(e.source, e.target, e.time_skip);
    auto nodes = enabled_nodes(g);
    std::vector<RecCandidate> out;
    for (const NodeGene *a : nodes) {
        for (const NodeGene *b : nodes) {
            if (b->type == NodeType::Input) continue;
            RecCandidate c{a->innovation, b->innovation, {}};
            for (int k = 1; k <= max_skip; ++k)
                if (!existing.count({a->innovation, b->innovation, static_cast<std::uint16_t>(k)}))
                    c.free_skips.push_back(static_cast<std::uint16_t>(k));
            if (!c.free_skips.empty()) out.push_back(std::move(c));
        }
    }
    return out;
}

std::vector<Connection> edges_with_enabled_bit(const Genome &g, bool enabled) {
    std::vector<Connection> out;
    for (std::size_t i = 0; i < g.edges.size(); ++i)
        if (g.edges[i].enabled == enabled) out.push_back({false, i});
    for (std::size_t i = 0; i < g.rec_edges.size(); ++i)
        if (g.rec_edges[i].enabled == enabled) out.push_back({true, i});
    return out;
}

std::vector<std::size_t> splittable_edges(const Genome &g) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < g.edges.size(); ++i)
        if (g.edge_usable(g.edges[i])) out.push_back(i);
    return out;
}

/// k distinct elements drawn uniformly without replacement.
template <typename T> std::vector<T> sample_distinct(std::vector<T> pool, std::size_t k, Rng &rng) {
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min(k, pool.size()));
    return pool;
}

/// Splits `items` into two parts for the two copies of a split node. A single
/// item is shared by both copies; two or more are partitioned with both sides non-empty.
template <typename T> std::pair<std::vector<T>, std::vector<T>> partition_two(std::vector<T> items, Rng &rng) {
    if (items.size() <= 1) return {items, items};
    std::shuffle(items.begin(), items.end(), rng);
    std::size_t cut = 1 + pick_index(rng, items.size() - 1);
    return {std::vector<T>(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(cut)),
            std::vector<T>(items.begin() + static_cast<std::ptrdiff_t>(cut), items.end())};
}

class Builder {
  public:
    Builder(Genome &g, InnovationCounter &counter) : g_(g), counter_(counter) {}

    Innovation add_node(NodeType type, double depth) {
        Innovation id = counter_.next_node();
        g_.nodes.push_back({id, type, depth, true, std::vector<double>(param_count(type), 0.0)});
        added_.nodes.push_back(id);
        return id;
    }

    void add_edge(Innovation source, Innovation target) {
        Innovation id = counter_.next_edge();
        g_.edges.push_back({id, source, target, 0.0, true});
        added_.edges.push_back(id);
    }

    void add_rec_edge(Innovation source, Innovation target, std::uint16_t skip) {
        Innovation id = counter_.next_edge();
        g_.rec_edges.push_back({id, source, target, skip, 0.0, true});
        added_.rec_edges.push_back(id);
    }

    NewGenes finish() {
        g_.sort_genes();
        return std::move(added_);
    }

  private:
    Genome &g_;
    InnovationCounter &counter_;
    NewGenes added_;
};

void assign_new_weights(Genome &child, const Genome &parent, const NewGenes &added, const WeightPolicy &policy,
                        Rng &rng) {
    if (policy.strategy.mutation == InheritStrategy::Lamarckian) {
        WeightStats stats = weight_stats(parent);
        for (Innovation id : added.nodes)
            for (double &p : child.find_node(id)->params) p = lamarckian_mutation_sample(stats, rng);
        for (Innovation id : added.edges)
            const_cast<EdgeGene *>(child.find_edge(id))->weight = lamarckian_mutation_sample(stats, rng);
        for (Innovation id : added.rec_edges)
            const_cast<RecurrentEdgeGene *>(child.find_rec_edge(id))->weight = lamarckian_mutation_sample(stats, rng);
        return;
    }
    const InitialStrategy rule = policy.strategy.initial;
    for (Innovation id : added.nodes)
        initialize_node_params(*child.find_node(id), fan_counts(child, id), rule, policy.config, rng);
    auto target_fans = [&](Innovation target) { return clamp_fans(rule, fan_counts(child, target)); };
    for (Innovation id : added.edges) {
        auto *e = const_cast<EdgeGene *>(child.find_edge(id));
        e->weight = sample_initial(rule, target_fans(e->target), policy.config, rng);
    }
    for (Innovation id : added.rec_edges) {
        auto *e = const_cast<RecurrentEdgeGene *>(child.find_rec_edge(id));
        e->weight = sample_initial(rule, target_fans(e->target), policy.config, rng);
    }
}

double random_open_depth(Rng &rng) {
    double d = 0.0;
    while (d <= 0.0 || d >= 1.0) d = uniform01(rng);
    return d;
}

void split_node(Genome &child, Builder &b, Innovation original, Rng &rng) {
    const NodeGene &orig = *child.find_node(original);
    const NodeType type = orig.type;
    const double depth = orig.depth;

    std::vector<Innovation> ff_in, ff_out;
    std::vector<std::pair<Innovation, std::uint16_t>> rec_in, rec_out; // (other end, skip)
    std::vector<std::uint16_t> self_loops;
    for (const auto &e : child.edges) {
        if (!child.edge_usable(e)) continue;
        if (e.target == original) ff_in.push_back(e.source);
        if (e.source == original) ff_out.push_back(e.target);
    }
    for (const auto &e : child.rec_edges) {
        if (!child.rec_edge_usable(e)) continue;
        if (e.source == original && e.target == original) self_loops.push_back(e.time_skip);
        else if (e.target == original) rec_in.emplace_back(e.source, e.time_skip);
        else if (e.source == original) rec_out.emplace_back(e.target, e.time_skip);
    }

    // In-connections (feed-forward, recurrent and self loops) are partitioned
    // together, as are out-connections.
    struct Link {
        int kind; // 0 ff, 1 rec, 2 self loop
        Innovation other;
        std::uint16_t skip;
    };
    std::vector<Link> ins, outs;
    for (Innovation s : ff_in) ins.push_back({0, s, 0});
    for (auto [s, k] : rec_in) ins.push_back({1, s, k});
    for (std::uint16_t k : self_loops) ins.push_back({2, 0, k});
    for (Innovation t : ff_out) outs.push_back({0, t, 0});
    for (auto [t, k] : rec_out) outs.push_back({1, t, k});

    auto [ins_a, ins_b] = partition_two(ins, rng);
    auto [outs_a, outs_b] = partition_two(outs, rng);

    child.find_node(original)->enabled = false;
    Innovation copy_a = b.add_node(type, depth);
    Innovation copy_b = b.add_node(type, depth);
    auto wire = [&](Innovation copy, const std::vector<Link> &in_links, const std::vector<Link> &out_links) {
        for (const Link &l : in_links) {
            if (l.kind == 0) b.add_edge(l.other, copy);
            else if (l.kind == 1) b.add_rec_edge(l.other, copy, l.skip);
            else b.add_rec_edge(copy, copy, l.skip);
        }
        for (const Link &l : out_links) {
            if (l.kind == 0) b.add_edge(copy, l.other);
            else b.add_rec_edge(copy, l.other, l.skip);
        }
    };
    wire(copy_a, ins_a, outs_a);
    wire(copy_b, ins_b, outs_b);
}

void merge_nodes(Genome &child, Builder &b, Innovation first, Innovation second, Rng &rng) {
    const double depth = (child.find_node(first)->depth + child.find_node(second)->depth) / 2.0;
    auto merged_end = [&](Innovation id) { return id == first || id == second; };

    std::set<Innovation> sources, targets;
    std::set<std::tuple<Innovation, Innovation, std::uint16_t>> recs; // 0 stands for the merged node
    for (const auto &e : child.edges) {
        if (!child.edge_usable(e)) continue;
        bool s_in = merged_end(e.source), t_in = merged_end(e.target);
        if (s_in && t_in) continue;
        if (t_in && child.find_node(e.source)->depth < depth) sources.insert(e.source);
        if (s_in && depth < child.find_node(e.target)->depth) targets.insert(e.target);
    }
    for (const auto &e : child.rec_edges) {
        if (!child.rec_edge_usable(e)) continue;
        bool s_in = merged_end(e.source), t_in = merged_end(e.target);
        if (!s_in && !t_in) continue;
        recs.emplace(s_in ? 0 : e.source, t_in ? 0 : e.target, e.time_skip);
    }

    child.find_node(first)->enabled = false;
    child.find_node(second)->enabled = false;
    Innovation merged = b.add_node(random_hidden_type(rng), depth);
    for (Innovation s : sources) b.add_edge(s, merged);
    for (Innovation t : targets) b.add_edge(merged, t);
    for (auto [s, t, k] : recs) b.add_rec_edge(s == 0 ? merged : s, t == 0 ? merged : t, k);
}

} // namespace

std::string_view to_string(MutationKind kind) {
    switch (kind) {
    case MutationKind::SplitEdge: return "split_edge";
    case MutationKind::AddEdge: return "add_edge";
    case MutationKind::EnableEdge: return "enable_edge";
    case MutationKind::AddRecurrentEdge: return "add_recurrent_edge";
    case MutationKind::DisableEdge: return "disable_edge";
    case MutationKind::DisableNode: return "disable_node";
    case MutationKind::EnableNode: return "enable_node";
    case MutationKind::AddNode: return "add_node";
    case MutationKind::SplitNode: return "split_node";
    case MutationKind::MergeNode: return "merge_node";
    }
    return "unknown";
}

std::optional<MutationKind> mutation_kind_from_string(std::string_view name) {
    for (MutationKind k : kAllMutationKinds)
        if (to_string(k) == name) return k;
    return std::nullopt;
}

bool is_applicable(const Genome &g, MutationKind kind, const VariationConfig &cfg) {
    switch (kind) {
    case MutationKind::SplitEdge: return !splittable_edges(g).empty();
    case MutationKind::AddEdge: return !add_edge_candidates(g).empty();
    case MutationKind::EnableEdge: return !edges_with_enabled_bit(g, false).empty();
    case MutationKind::AddRecurrentEdge: return !add_rec_edge_candidates(g, cfg.max_time_skip).empty();
    case MutationKind::DisableEdge: return !edges_with_enabled_bit(g, true).empty();
    case MutationKind::DisableNode: return !hidden_nodes(g, true).empty();
    case MutationKind::EnableNode: return !hidden_nodes(g, false).empty();
    case MutationKind::AddNode: return cfg.max_new_fan >= 1;
    case MutationKind::SplitNode: return !hidden_nodes(g, true).empty();
    case MutationKind::MergeNode: return hidden_nodes(g, true).size() >= 2;
    }
    return false;
}

std::vector<MutationKind> applicable_kinds(const Genome &g, const VariationConfig &cfg) {
    std::vector<MutationKind> out;
    for (MutationKind k : kAllMutationKinds)
        if (cfg.is_enabled(k) && is_applicable(g, k, cfg)) out.push_back(k);
    return out;
}

std::optional<Genome> mutate(const Genome &parent, MutationKind kind, const WeightPolicy &policy,
                             const VariationConfig &cfg, InnovationCounter &counter, Rng &rng) {
    Genome child = parent;
    child.clear_evaluation();
    Builder b(child, counter);

    switch (kind) {
    case MutationKind::AddEdge: {
        auto candidates = add_edge_candidates(child);
        if (candidates.empty()) return std::nullopt;
        auto [s, t] = candidates[pick_index(rng, candidates.size())];
        b.add_edge(s, t);
        break;
    }
    case MutationKind::AddRecurrentEdge: {
        auto candidates = add_rec_edge_candidates(child, cfg.max_time_skip);
        if (candidates.empty()) return std::nullopt;
        const RecCandidate &c = candidates[pick_index(rng, candidates.size())];
        b.add_rec_edge(c.source, c.target, c.free_skips[pick_index(rng, c.free_skips.size())]);
        break;
    }
    case MutationKind::EnableEdge:
    case MutationKind::DisableEdge: {
        bool enable = kind == MutationKind::EnableEdge;
        auto candidates = edges_with_enabled_bit(child, !enable);
        if (candidates.empty()) return std::nullopt;
        Connection c = candidates[pick_index(rng, candidates.size())];
        if (c.recurrent) child.rec_edges[c.index].enabled = enable;
        else child.edges[c.index].enabled = enable;
        break;
    }
    case MutationKind::SplitEdge: {
        auto candidates = splittable_edges(child);
        if (candidates.empty()) return std::nullopt;
        EdgeGene &e = child.edges[candidates[pick_index(rng, candidates.size())]];
        e.enabled = false;
        Innovation u = e.source, v = e.target;
        double depth = (child.find_node(u)->depth + child.find_node(v)->depth) / 2.0;
        Innovation w = b.add_node(random_hidden_type(rng), depth);
        b.add_edge(u, w);
        b.add_edge(w, v);
        break;
    }
    case MutationKind::AddNode: {
        if (cfg.max_new_fan < 1) return std::nullopt;
        double depth = random_open_depth(rng);
        NodeType type = random_hidden_type(rng);
        std::vector<Innovation> shallower, deeper;
        for (const auto &n : child.nodes) {
            if (!n.enabled) continue;
            if (n.depth < depth) shallower.push_back(n.innovation);
            else if (n.depth > depth) deeper.push_back(n.innovation);
        }
        auto fan = [&](std::size_t available) {
            std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(cfg.max_new_fan), available);
            return 1 + pick_index(rng, hi);
        };
        std::size_t k_in = fan(shallower.size());
        std::size_t k_out = fan(deeper.size());
        auto sources = sample_distinct(shallower, k_in, rng);
        auto targets = sample_distinct(deeper, k_out, rng);
        Innovation w = b.add_node(type, depth);
        for (Innovation s : sources) b.add_edge(s, w);
        for (Innovation t : targets) b.add_edge(w, t);
        break;
    }
    case MutationKind::EnableNode:
    case MutationKind::DisableNode: {
        bool enable = kind == MutationKind::EnableNode;
        auto candidates = hidden_nodes(child, !enable);
        if (candidates.empty()) return std::nullopt;
        child.find_node(candidates[pick_index(rng, candidates.size())])->enabled = enable;
        break;
    }
    case MutationKind::SplitNode: {
        auto candidates = hidden_nodes(child, true);
        if (candidates.empty()) return std::nullopt;
        split_node(child, b, candidates[pick_index(rng, candidates.size())], rng);
        break;
    }
    case MutationKind::MergeNode: {
        auto candidates = hidden_nodes(child, true);
        if (candidates.size() < 2) return std::nullopt;
        auto pair = sample_distinct(candidates, 2, rng);
        merge_nodes(child, b, pair[0], pair[1], rng);
        break;
    }
    }

    NewGenes added = b.finish();
    assign_new_weights(child, parent, added, policy, rng);
    return child;
}

MutationOutcome mutate_random(const Genome &parent, const WeightPolicy &policy, const VariationConfig &cfg,
                              InnovationCounter &counter, Rng &rng) {
    std::vector<MutationKind> enabled;
    for (MutationKind k : kAllMutationKinds)
        if (cfg.is_enabled(k)) enabled.push_back(k);
    if (!enabled.empty()) {
        for (int attempt = 0; attempt < cfg.retry_bound; ++attempt) {
            MutationKind kind = enabled[pick_index(rng, enabled.size())];
            if (auto child = mutate(parent, kind, policy, cfg, counter, rng)) return {std::move(*child), kind};
        }
    }
    Genome clone = parent;
    clone.clear_evaluation();
    return {std::move(clone), std::nullopt};
}

std::pair<const Genome *, const Genome *> order_parents(const Genome &a, const Genome &b) {
    if (!a.fitness || !b.fitness) throw MissingFitnessError("crossover parents must be trained and evaluated");
    if (*a.fitness < *b.fitness) return {&a, &b};
    if (*b.fitness < *a.fitness) return {&b, &a};
    return a.generation_id <= b.generation_id ? std::pair{&a, &b} : std::pair{&b, &a};
}

Genome recombine(const Genome &better, const Genome &worse, const WeightPolicy &policy, double r, Rng &rng) {
    const bool lamarckian = policy.strategy.crossover == InheritStrategy::Lamarckian;
    Genome child;

    for (const auto &n : better.nodes) {
        NodeGene c = n;
        if (const NodeGene *other = worse.find_node(n.innovation)) {
            c.enabled = n.enabled || other->enabled;
            if (lamarckian)
                for (std::size_t i = 0; i < c.params.size(); ++i)
                    c.params[i] = lamarckian_blend(n.params[i], other->params[i], r);
        }
        child.nodes.push_back(std::move(c));
    }
    for (const auto &n : worse.nodes)
        if (!better.find_node(n.innovation)) child.nodes.push_back(n);

    std::set<std::pair<Innovation, Innovation>> pairs;
    for (const auto &e : better.edges) {
        EdgeGene c = e;
        if (const EdgeGene *other = worse.find_edge(e.innovation)) {
            c.enabled = e.enabled || other->enabled;
            if (lamarckian) c.weight = lamarckian_blend(e.weight, other->weight, r);
        }
        pairs.emplace(c.source, c.target);
        child.edges.push_back(c);
    }
    for (const auto &e : worse.edges) {
        if (better.find_edge(e.innovation)) continue;
        // The same node pair may have been connected independently in each lineage.
        if (!pairs.emplace(e.source, e.target).second) continue;
        child.edges.push_back(e);
    }

    std::set<std::tuple<Innovation, Innovation, std::uint16_t>> triples;
    for (const auto &e : better.rec_edges) {
        RecurrentEdgeGene c = e;
        if (const RecurrentEdgeGene *other = worse.find_rec_edge(e.innovation)) {
            c.enabled = e.enabled || other->enabled;
            if (lamarckian) c.weight = lamarckian_blend(e.weight, other->weight, r);
        }
        triples.emplace(c.source, c.target, c.time_skip);
        child.rec_edges.push_back(c);
    }
    for (const auto &e : worse.rec_edges) {
        if (better.find_rec_edge(e.innovation)) continue;
        if (!triples.emplace(e.source, e.target, e.time_skip).second) continue;
        child.rec_edges.push_back(e);
    }

    child.sort_genes();
    if (!lamarckian) child = initialize_genome_weights(std::move(child), policy.strategy.initial, policy.config, rng);
    child.clear_evaluation();
    return child;
}

Genome crossover(const Genome &a, const Genome &b, const WeightPolicy &policy, Rng &rng) {
    auto [better, worse] = order_parents(a, b);
    double r = crossover_r(rng);
    return recombine(*better, *worse, policy, r, rng);
}

} // namespace evoforge
