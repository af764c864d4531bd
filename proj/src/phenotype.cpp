// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "evoforge/error.hpp"
#include "evoforge/rnn.hpp"

namespace evoforge {

namespace {

template <typename Gene> Gene *find_gene(std::vector<Gene> &genes, Innovation id) {
    auto it = std::lower_bound(genes.begin(), genes.end(), id,
                               [](const Gene &g, Innovation v) { return g.innovation < v; });
    return it != genes.end() && it->innovation == id ? &*it : nullptr;
}

} // namespace

Phenotype::Phenotype(const Genome &g) {
    std::vector<const NodeGene *> order;
    for (const auto &n : g.nodes)
        if (n.enabled) order.push_back(&n);
    std::stable_sort(order.begin(), order.end(), [](const NodeGene *a, const NodeGene *b) {
        return a->depth != b->depth ? a->depth < b->depth : a->innovation < b->innovation;
    });

    std::unordered_map<Innovation, std::uint32_t> index;
    for (const NodeGene *n : order) {
        auto i = static_cast<std::uint32_t>(nodes_.size());
        index.emplace(n->innovation, i);
        nodes_.push_back({n->innovation, n->type, static_cast<std::uint32_t>(theta_.size()),
                          static_cast<std::uint32_t>(n->params.size()), 0, 0});
        if (!n->params.empty()) slots_.push_back({GeneKind::NodeParams, n->innovation, nodes_.back().param_offset});
        theta_.insert(theta_.end(), n->params.begin(), n->params.end());
        if (n->type == NodeType::Input) input_nodes_.push_back(i);
        if (n->type == NodeType::Output) output_nodes_.push_back(i);
    }

    std::vector<std::vector<InEdge>> incoming(nodes_.size());
    for (const auto &e : g.edges) {
        if (!g.edge_usable(e)) continue;
        auto w = static_cast<std::uint32_t>(theta_.size());
        theta_.push_back(e.weight);
        slots_.push_back({GeneKind::Edge, e.innovation, w});
        incoming[index.at(e.target)].push_back({index.at(e.source), w, 0});
    }
    for (const auto &e : g.rec_edges) {
        if (!g.rec_edge_usable(e)) continue;
        auto w = static_cast<std::uint32_t>(theta_.size());
        theta_.push_back(e.weight);
        slots_.push_back({GeneKind::RecEdge, e.innovation, w});
        incoming[index.at(e.target)].push_back({index.at(e.source), w, e.time_skip});
        horizon_ = std::max<std::size_t>(horizon_, e.time_skip);
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        nodes_[i].edges_begin = static_cast<std::uint32_t>(in_edges_.size());
        in_edges_.insert(in_edges_.end(), incoming[i].begin(), incoming[i].end());
        nodes_[i].edges_end = static_cast<std::uint32_t>(in_edges_.size());
    }

    // Reachability from the inputs over feed-forward and recurrent edges.
    std::vector<char> reached(nodes_.size(), 0);
    for (auto i : input_nodes_) reached[i] = 1;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            if (reached[i]) continue;
            for (auto k = nodes_[i].edges_begin; k < nodes_[i].edges_end; ++k) {
                if (reached[in_edges_[k].source]) {
                    reached[i] = 1;
                    changed = true;
                    break;
                }
            }
        }
    }
    for (auto i : output_nodes_)
        if (!reached[i]) disconnected_.push_back(nodes_[i].innovation);
}

std::vector<Innovation> Phenotype::topo_order() const {
    std::vector<Innovation> out;
    out.reserve(nodes_.size());
    for (const auto &n : nodes_) out.push_back(n.innovation);
    return out;
}

void Phenotype::set_parameters(std::span<const double> theta) {
    if (theta.size() != theta_.size())
        throw DimensionError("parameter vector has " + std::to_string(theta.size()) + " entries, expected " +
                             std::to_string(theta_.size()));
    std::copy(theta.begin(), theta.end(), theta_.begin());
}

void Phenotype::write_back(Genome &g) const {
    for (const Slot &s : slots_) {
        switch (s.kind) {
        case GeneKind::NodeParams: {
            NodeGene *n = find_gene(g.nodes, s.innovation);
            std::copy_n(theta_.begin() + s.offset, n->params.size(), n->params.begin());
            break;
        }
        case GeneKind::Edge: find_gene(g.edges, s.innovation)->weight = theta_[s.offset]; break;
        case GeneKind::RecEdge: find_gene(g.rec_edges, s.innovation)->weight = theta_[s.offset]; break;
        }
    }
}

void Phenotype::check_inputs(const Matrix &inputs) const {
    if (inputs.cols() != input_nodes_.size())
        throw DimensionError("series has " + std::to_string(inputs.cols()) + " columns, network expects " +
                             std::to_string(input_nodes_.size()));
}

// `ring` holds `slots` rows of node outputs; row (t mod slots) is the current step.
double Phenotype::aggregate(const Node &n, std::size_t t, const double *ring, std::size_t slots) const {
    const std::size_t width = nodes_.size();
    double x = 0.0;
    for (auto k = n.edges_begin; k < n.edges_end; ++k) {
        const InEdge &e = in_edges_[k];
        if (e.skip > t) continue;
        x += theta_[e.weight] * ring[((t - e.skip) % slots) * width + e.source];
    }
    return x;
}

Matrix Phenotype::forward(const Matrix &inputs, std::size_t buffer_length) const {
    check_inputs(inputs);
    const std::size_t slots = buffer_length == 0 ? horizon_ + 1 : buffer_length;
    const std::size_t width = nodes_.size();
    const std::size_t T = inputs.rows();
    std::vector<double> ring(slots * width, 0.0);
    std::vector<double> h_prev(width, 0.0), c_prev(width, 0.0);
    Matrix out(T, output_nodes_.size());
    CellCache cache;

    for (std::size_t t = 0; t < T; ++t) {
        double *row = ring.data() + (t % slots) * width;
        for (std::size_t i = 0; i < width; ++i) {
            const Node &n = nodes_[i];
            if (n.type == NodeType::Input) {
                row[i] = inputs(t, i);
                continue;
            }
            double x = aggregate(n, t, ring.data(), slots);
            CellOutput o = cell_forward(n.type, {theta_.data() + n.param_offset, n.n_params}, x, h_prev[i],
                                        c_prev[i], cache);
            row[i] = o.h;
            h_prev[i] = o.h;
            c_prev[i] = o.c;
        }
        for (std::size_t k = 0; k < output_nodes_.size(); ++k) {
            double y = row[output_nodes_[k]];
            if (!std::isfinite(y)) throw NumericalDivergence(t);
            out(t, k) = y;
        }
    }
    return out;
}

LossGradient Phenotype::loss_and_gradient(const Sequence &seq, std::size_t window) const {
    check_inputs(seq.inputs);
    if (seq.targets.rows() != seq.inputs.rows() || seq.targets.cols() != output_nodes_.size())
        throw DimensionError("targets must be " + std::to_string(seq.inputs.rows()) + "x" +
                             std::to_string(output_nodes_.size()));
    if (window == 0) window = seq.inputs.rows() + 1;
    const std::size_t width = nodes_.size();
    const std::size_t T = seq.inputs.rows();
    const std::size_t n_out = output_nodes_.size();

    // Full history; H doubles as a ring buffer with T slots.
    std::vector<double> H(T * width, 0.0), C(T * width, 0.0), X(T * width, 0.0);
    std::vector<CellCache> cache(T * width);
    for (std::size_t t = 0; t < T; ++t) {
        double *row = H.data() + t * width;
        for (std::size_t i = 0; i < width; ++i) {
            const Node &n = nodes_[i];
            if (n.type == NodeType::Input) {
                row[i] = seq.inputs(t, i);
                continue;
            }
            double x = aggregate(n, t, H.data(), T);
            double hp = t > 0 ? H[(t - 1) * width + i] : 0.0;
            double cp = t > 0 ? C[(t - 1) * width + i] : 0.0;
            CellOutput o = cell_forward(n.type, {theta_.data() + n.param_offset, n.n_params}, x, hp, cp,
                                        cache[t * width + i]);
            X[t * width + i] = x;
            row[i] = o.h;
            C[t * width + i] = o.c;
        }
        for (auto o : output_nodes_)
            if (!std::isfinite(row[o])) throw NumericalDivergence(t);
    }

    LossGradient result;
    result.gradient.assign(theta_.size(), 0.0);
    std::vector<double> dH(T * width, 0.0), dC(T * width, 0.0);
    const double scale = 1.0 / static_cast<double>(T * n_out);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t k = 0; k < n_out; ++k) {
            double diff = H[t * width + output_nodes_[k]] - seq.targets(t, k);
            result.loss += diff * diff;
            dH[t * width + output_nodes_[k]] += 2.0 * diff * scale;
        }
    }
    result.loss *= scale;
    if (!std::isfinite(result.loss)) throw NumericalDivergence(T == 0 ? 0 : T - 1);

    std::span<double> grad(result.gradient);
    for (std::size_t t = T; t-- > 0;) {
        const std::size_t w0 = t - t % window;
        for (std::size_t i = width; i-- > 0;) {
            const Node &n = nodes_[i];
            if (n.type == NodeType::Input) continue;
            const std::size_t at = t * width + i;
            if (dH[at] == 0.0 && dC[at] == 0.0) continue;
            double hp = t > 0 ? H[at - width] : 0.0;
            double cp = t > 0 ? C[at - width] : 0.0;
            CellGrads g = cell_backward(n.type, {theta_.data() + n.param_offset, n.n_params}, X[at], hp, cp,
                                        cache[at], dH[at], dC[at], grad.subspan(n.param_offset, n.n_params));
            if (t > w0) {
                dH[at - width] += g.dh_prev;
                dC[at - width] += g.dc_prev;
            }
            for (auto k = n.edges_begin; k < n.edges_end; ++k) {
                const InEdge &e = in_edges_[k];
                if (e.skip > t) continue;
                const std::size_t s = t - e.skip;
                grad[e.weight] += g.dx * H[s * width + e.source];
                if (s >= w0) dH[s * width + e.source] += g.dx * theta_[e.weight];
            }
        }
    }
    return result;
}

ErrorMetrics error_metrics(const Matrix &predictions, const Matrix &targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols())
        throw DimensionError("prediction and target shapes differ");
    ErrorMetrics m;
    auto p = predictions.data();
    auto y = targets.data();
    if (p.empty()) return m;
    for (std::size_t k = 0; k < p.size(); ++k) {
        double d = p[k] - y[k];
        m.mse += d * d;
        m.mae += std::abs(d);
    }
    m.mse /= static_cast<double>(p.size());
    m.mae /= static_cast<double>(p.size());
    return m;
}

ErrorMetrics evaluate(const Genome &g, const Sequence &seq) {
    Phenotype p(g);
    return error_metrics(p.forward(seq.inputs), seq.targets);
}

} // namespace evoforge
