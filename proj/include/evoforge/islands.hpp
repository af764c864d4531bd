// SPDX-License-Identifier: Apache-2.0
//
// Steady-state island model. A coordinator owns every island; children are
// generated one at a time, trained by a worker pool and offered back to
// their island of origin in completion order.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "evoforge/genome.hpp"
#include "evoforge/rng.hpp"
#include "evoforge/rnn.hpp"
#include "evoforge/variation.hpp"
#include "evoforge/weights.hpp"

namespace evoforge {

struct IslandConfig {
    std::size_t n_islands = 10;
    std::size_t capacity = 10;
    double p_mutation = 0.70;
    double p_intra = 0.20;
    double p_inter = 0.10;

    void validate() const;
};

struct Budget {
    int bp_epochs_per_genome = 10;
    std::int64_t total_bp_epochs = 2000;

    std::size_t max_genomes() const;
    void validate() const;
};

/// Bounded elite pool kept sorted by fitness (ties by generation id).
class Island {
  public:
    Island(std::size_t id, std::size_t capacity) : id_(id), capacity_(capacity) {}

    std::size_t id() const noexcept { return id_; }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }
    const std::vector<Genome> &members() const noexcept { return members_; }
    const Genome &best() const { return members_.front(); }
    const Genome &worst() const { return members_.back(); }

    /// A genome structurally identical to a member replaces it only when
    /// strictly better. Otherwise it is added while below capacity, or
    /// replaces the worst member when strictly better than it.
    /// Throws MissingFitnessError for unevaluated genomes.
    bool insert(Genome g);

  private:
    std::size_t id_;
    std::size_t capacity_;
    std::vector<Genome> members_;
};

enum class ReproductionKind : std::uint8_t { Mutation, IntraCrossover, InterCrossover };

std::string_view to_string(ReproductionKind kind);

struct Population {
    std::vector<Island> islands;
    /// Round-robin cursor for the next island of origin.
    std::size_t next_origin = 0;

    Population(std::size_t n_islands, std::size_t capacity);
    bool empty() const;
    std::size_t genome_count() const;
    /// Lowest-fitness genome over every island; nullptr when empty.
    const Genome *best() const;
};

struct ChildRequest {
    Genome child;
    std::size_t island = 0;
    ReproductionKind kind = ReproductionKind::Mutation;
    std::array<std::size_t, 2> parent_islands{};
};

/// Picks the next non-empty island of origin in round-robin order, draws the
/// reproduction kind and parents uniformly, and returns the untrained child.
/// Throws NotSeededError when every island is empty.
ChildRequest generate_child(Population &pop, const IslandConfig &cfg, const WeightPolicy &policy,
                            const VariationConfig &vcfg, InnovationCounter &counter, Rng &rng);

struct TraceRecord {
    std::size_t inserted_count = 0;
    std::size_t trained_count = 0;
    double best_mse = 0.0;
    std::size_t island_id = 0;
    std::size_t genome_nodes = 0;
    std::size_t genome_edges = 0;
    std::size_t genome_rec_edges = 0;
};

struct SearchConfig {
    IslandConfig islands;
    Budget budget;
    WeightPolicy policy;
    VariationConfig variation;
    /// `epochs` is overridden by budget.bp_epochs_per_genome.
    TrainConfig train;
    std::size_t workers = 1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SearchResult {
    Genome best;
    std::vector<TraceRecord> trace;
    std::size_t trained_genomes = 0;
    std::int64_t trained_epochs = 0;
    std::size_t diverged_genomes = 0;
    std::size_t inserted_genomes = 0;
    GeneCounts best_counts;
    std::vector<Island> islands;
};

using InsertObserver = std::function<void(const TraceRecord &, const Population &)>;

/// Trains one initialized seed per island, then generates, trains and
/// inserts children until budget.max_genomes() genomes have been trained.
/// With one worker training runs inline and the result is a pure function
/// of (config, data).
SearchResult run_search(const SearchConfig &cfg, const TrainingData &data, const InsertObserver &observer = {});

} // namespace evoforge
