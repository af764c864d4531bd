// SPDX-License-Identifier: Apache-2.0
//
// Executable form of a genome. Nodes run in (depth, innovation) order at
// every timestep; a node's aggregated input is
//
//   x_t = sum_ff w * h_src(t) + sum_rec w * h_src(t - skip)
//
// where reads before t = 0 yield 0. Training is full-batch BPTT with one
// Nesterov step per epoch.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "evoforge/cells.hpp"
#include "evoforge/genome.hpp"
#include "evoforge/matrix.hpp"

namespace evoforge {

/// Row t of `targets` is the desired network output after reading row t of `inputs`.
struct Sequence {
    Matrix inputs;
    Matrix targets;
};

struct TrainingData {
    Sequence train;
    Sequence validation;
};

struct TrainConfig {
    double learning_rate = 0.001;
    double momentum = 0.9;
    int epochs = 10;
    double grad_clip_high = 1.0;
    double grad_boost_low = 0.05;
    /// BPTT truncation length; state still flows across windows.
    std::size_t window = 500;

    /// Throws ConfigError naming the first invalid field.
    void validate() const;
};

struct ErrorMetrics {
    double mse = 0.0;
    double mae = 0.0;
};

struct LossGradient {
    double loss = 0.0;
    std::vector<double> gradient;
};

class Phenotype {
  public:
    explicit Phenotype(const Genome &g);

    std::size_t input_count() const noexcept { return input_nodes_.size(); }
    std::size_t output_count() const noexcept { return output_nodes_.size(); }
    std::size_t node_count() const noexcept { return nodes_.size(); }
    /// Largest time skip over usable recurrent edges (0 without any).
    std::size_t time_horizon() const noexcept { return horizon_; }

    /// Node innovations in evaluation order.
    std::vector<Innovation> topo_order() const;
    /// Outputs that no input reaches; they emit their bias only.
    const std::vector<Innovation> &disconnected_outputs() const noexcept { return disconnected_; }

    std::span<const double> parameters() const noexcept { return theta_; }
    std::size_t parameter_count() const noexcept { return theta_.size(); }
    void set_parameters(std::span<const double> theta);

    /// Runs the series through ring buffers of `buffer_length` slots per node
    /// (0 selects time_horizon() + 1). Throws NumericalDivergence.
    Matrix forward(const Matrix &inputs, std::size_t buffer_length = 0) const;

    /// MSE loss over every timestep and output, and its gradient with respect
    /// to parameters(). Gradients do not cross `window`-step boundaries.
    LossGradient loss_and_gradient(const Sequence &seq, std::size_t window = 500) const;

    /// Copies parameters() back into the matching genes.
    void write_back(Genome &g) const;

  private:
    struct InEdge {
        std::uint32_t source;   // node index
        std::uint32_t weight;   // index into theta_
        std::uint32_t skip;     // 0 for feed-forward
    };
    struct Node {
        Innovation innovation;
        NodeType type;
        std::uint32_t param_offset;
        std::uint32_t n_params;
        std::uint32_t edges_begin; // into in_edges_
        std::uint32_t edges_end;
    };
    enum class GeneKind : std::uint8_t { NodeParams, Edge, RecEdge };
    struct Slot {
        GeneKind kind;
        Innovation innovation;
        std::uint32_t offset; // first theta index
    };

    double aggregate(const Node &n, std::size_t t, const double *ring, std::size_t slots) const;
    void check_inputs(const Matrix &inputs) const;

    std::vector<Node> nodes_;
    std::vector<InEdge> in_edges_;
    std::vector<std::uint32_t> input_nodes_;
    std::vector<std::uint32_t> output_nodes_;
    std::vector<double> theta_;
    std::vector<Slot> slots_;
    std::vector<Innovation> disconnected_;
    std::size_t horizon_ = 0;
};

inline Phenotype build_phenotype(const Genome &g) { return Phenotype(g); }

/// Mean squared and mean absolute error over every entry.
ErrorMetrics error_metrics(const Matrix &predictions, const Matrix &targets);

/// Forward pass from zero state followed by error_metrics.
ErrorMetrics evaluate(const Genome &g, const Sequence &seq);

/// Whole-vector L2 rescaling: norms above grad_clip_high are scaled down to
/// it, nonzero norms below grad_boost_low are scaled up to it.
std::vector<double> rescale_gradient(std::vector<double> grad, const TrainConfig &cfg);

/// Runs cfg.epochs Nesterov steps on data.train and scores the final weights
/// on data.validation. A non-finite value anywhere marks the genome diverged
/// with infinite fitness instead of throwing.
Genome train(Genome g, const TrainingData &data, const TrainConfig &cfg);

} // namespace evoforge
