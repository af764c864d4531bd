// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "evoforge/data.hpp"
#include "evoforge/error.hpp"
#include "evoforge/genome_io.hpp"
#include "evoforge/islands.hpp"

using namespace evoforge;

namespace {

Genome with_fitness(Genome g, double f, std::int64_t gen = 0) {
    g.fitness = f;
    g.generation_id = gen;
    return g;
}

/// Every island holds `per_island` structurally distinct mutants of one seed.
Population full_population(std::size_t n_islands, std::size_t per_island, InnovationCounter &counter, Rng &rng) {
    Population pop(n_islands, 10);
    const Genome seed = seed_genome(3, 1, counter);
    WeightPolicy policy;
    VariationConfig vcfg;
    std::int64_t gen = 0;
    for (auto &island : pop.islands) {
        while (island.size() < per_island) {
            Genome parent = island.empty() ? seed : island.members()[pick_index(rng, island.size())];
            Genome child = mutate_random(parent, policy, vcfg, counter, rng).child;
            island.insert(with_fitness(child, uniform01(rng), gen++));
        }
    }
    return pop;
}

SearchConfig tiny_search(int per_genome, std::int64_t total, std::uint64_t seed) {
    SearchConfig cfg;
    cfg.islands.n_islands = 3;
    cfg.islands.capacity = 4;
    cfg.budget = {per_genome, total};
    cfg.seed = seed;
    cfg.workers = 1;
    return cfg;
}

TrainingData tiny_data() {
    DatasetSpec spec;
    spec.synthetic = "sine_mix";
    spec.length = 120;
    return prepare_training_data(spec);
}

} // namespace

TEST(Island, InsertExamples) {
    InnovationCounter counter;
    Rng rng = make_rng(1);
    const Genome seed = seed_genome(2, 1, counter);
    std::vector<Genome> distinct;
    Genome cur = seed;
    while (distinct.size() < 4) {
        cur = mutate_random(cur, {}, {}, counter, rng).child;
        distinct.push_back(cur);
    }

    Island island(0, 3);
    EXPECT_TRUE(island.insert(with_fitness(distinct[0], 0.5)));
    EXPECT_TRUE(island.insert(with_fitness(distinct[1], 0.2)));
    EXPECT_TRUE(island.insert(with_fitness(distinct[2], 0.8)));
    EXPECT_EQ(island.size(), 3u);
    EXPECT_EQ(*island.best().fitness, 0.2);
    EXPECT_EQ(*island.worst().fitness, 0.8);

    EXPECT_FALSE(island.insert(with_fitness(distinct[3], 0.9))) << "worse than all";
    EXPECT_EQ(island.size(), 3u);
    EXPECT_EQ(*island.worst().fitness, 0.8);

    EXPECT_TRUE(island.insert(with_fitness(distinct[3], 0.1))) << "new best";
    EXPECT_EQ(island.size(), 3u);
    EXPECT_EQ(*island.best().fitness, 0.1);
    EXPECT_EQ(*island.worst().fitness, 0.5);
}

TEST(Island, DuplicatesReplaceOnlyWhenBetter) {
    InnovationCounter counter;
    Genome g = seed_genome(2, 1, counter);
    Island island(0, 5);
    EXPECT_TRUE(island.insert(with_fitness(g, 0.5)));
    EXPECT_FALSE(island.insert(with_fitness(g, 0.5)));
    EXPECT_FALSE(island.insert(with_fitness(g, 0.7)));
    EXPECT_TRUE(island.insert(with_fitness(g, 0.3)));
    EXPECT_EQ(island.size(), 1u);
    EXPECT_EQ(*island.best().fitness, 0.3);
}

TEST(Island, RejectsUnevaluated) {
    InnovationCounter counter;
    Island island(0, 2);
    EXPECT_THROW(island.insert(seed_genome(1, 1, counter)), MissingFitnessError);
}

TEST(Island, TiesOrderedByGeneration) {
    InnovationCounter counter;
    Rng rng = make_rng(2);
    Genome a = mutate_random(seed_genome(2, 1, counter), {}, {}, counter, rng).child;
    Genome b = mutate_random(a, {}, {}, counter, rng).child;
    Island island(0, 4);
    island.insert(with_fitness(b, 0.4, 9));
    island.insert(with_fitness(a, 0.4, 3));
    EXPECT_EQ(island.best().generation_id, 3);
}

TEST(IslandConfig, Validation) {
    IslandConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.p_inter = 0.2;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.capacity = 1;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.n_islands = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Budget, MaxGenomes) {
    EXPECT_EQ((Budget{1, 1000}.max_genomes()), 1000u);
    EXPECT_EQ((Budget{5, 1000}.max_genomes()), 200u);
    EXPECT_EQ((Budget{10, 1000}.max_genomes()), 100u);
    EXPECT_EQ((Budget{3, 10}.max_genomes()), 3u);
    EXPECT_THROW((Budget{0, 10}.max_genomes()), ConfigError);
    EXPECT_THROW((Budget{20, 10}.validate()), ConfigError);
}

TEST(GenerateChild, KindFrequencies) {
    InnovationCounter counter;
    Rng rng = make_rng(3);
    Population pop = full_population(10, 3, counter, rng);
    IslandConfig cfg;
    std::array<int, 3> counts{};
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        ChildRequest req = generate_child(pop, cfg, {}, {}, counter, rng);
        ++counts[static_cast<std::size_t>(req.kind)];
        EXPECT_EQ(req.child.check_invariants(), "");
    }
    const std::array<double, 3> p{0.7, 0.2, 0.1};
    for (std::size_t k = 0; k < 3; ++k) {
        double sigma = std::sqrt(n * p[k] * (1 - p[k]));
        EXPECT_NEAR(counts[k], n * p[k], 3 * sigma) << to_string(static_cast<ReproductionKind>(k));
    }
}

TEST(GenerateChild, SingleMemberFallsBackToMutation) {
    InnovationCounter counter;
    Rng rng = make_rng(4);
    Population pop(1, 10);
    pop.islands[0].insert(with_fitness(seed_genome(2, 1, counter), 1.0));
    for (int i = 0; i < 500; ++i) EXPECT_EQ(generate_child(pop, {}, {}, {}, counter, rng).kind, ReproductionKind::Mutation);
}

TEST(GenerateChild, InterIslandParentsAreDistinct) {
    InnovationCounter counter;
    Rng rng = make_rng(5);
    Population pop = full_population(4, 2, counter, rng);
    IslandConfig cfg;
    cfg.p_mutation = 0.0;
    cfg.p_intra = 0.0;
    cfg.p_inter = 1.0;
    for (int i = 0; i < 500; ++i) {
        ChildRequest req = generate_child(pop, cfg, {}, {}, counter, rng);
        ASSERT_EQ(req.kind, ReproductionKind::InterCrossover);
        EXPECT_NE(req.parent_islands[0], req.parent_islands[1]);
        EXPECT_EQ(req.parent_islands[0], req.island);
        EXPECT_EQ(req.child.island_of_origin, static_cast<std::int32_t>(req.island));
    }
}

TEST(GenerateChild, RoundRobinSkipsEmptyIslands) {
    InnovationCounter counter;
    Rng rng = make_rng(6);
    Population pop(4, 10);
    pop.islands[1].insert(with_fitness(seed_genome(1, 1, counter), 1.0));
    pop.islands[3].insert(with_fitness(seed_genome(1, 1, counter), 1.0));
    std::vector<std::size_t> seen;
    for (int i = 0; i < 4; ++i) seen.push_back(generate_child(pop, {}, {}, {}, counter, rng).island);
    EXPECT_EQ(seen, (std::vector<std::size_t>{1, 3, 1, 3}));
}

TEST(GenerateChild, EmptyPopulation) {
    InnovationCounter counter;
    Rng rng = make_rng(7);
    Population pop(3, 10);
    EXPECT_THROW(generate_child(pop, {}, {}, {}, counter, rng), NotSeededError);
}

TEST(Search, BudgetAccounting) {
    TrainingData data = tiny_data();
    SearchResult r = run_search(tiny_search(1, 100, 1), data);
    EXPECT_EQ(r.trained_genomes, 100u);
    EXPECT_EQ(r.trained_epochs, 100);

    SearchResult q = run_search(tiny_search(3, 100, 1), data);
    EXPECT_EQ(q.trained_genomes, 33u);
    EXPECT_EQ(q.trained_epochs, 99);
}

TEST(Search, MonotoneBestAndCapacity) {
    TrainingData data = tiny_data();
    SearchConfig cfg = tiny_search(2, 160, 2);
    std::size_t observed = 0;
    auto observer = [&](const TraceRecord &rec, const Population &pop) {
        ++observed;
        for (const auto &island : pop.islands) {
            EXPECT_LE(island.size(), island.capacity());
            for (std::size_t k = 1; k < island.size(); ++k)
                EXPECT_LE(*island.members()[k - 1].fitness, *island.members()[k].fitness);
        }
        EXPECT_EQ(rec.best_mse, *pop.best()->fitness);
    };
    SearchResult r = run_search(cfg, data, observer);
    EXPECT_EQ(observed, r.trace.size());
    EXPECT_EQ(r.inserted_genomes, r.trace.size());
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
        EXPECT_LE(r.trace[k].best_mse, r.trace[k - 1].best_mse);
        EXPECT_GT(r.trace[k].inserted_count, r.trace[k - 1].inserted_count);
        EXPECT_GE(r.trace[k].trained_count, r.trace[k - 1].trained_count);
    }
    EXPECT_EQ(*r.best.fitness, r.trace.back().best_mse);
    EXPECT_EQ(r.best_counts, r.best.enabled_counts());
}

TEST(Search, IslandFitnessMatchesReevaluation) {
    TrainingData data = tiny_data();
    SearchResult r = run_search(tiny_search(2, 80, 3), data);
    std::size_t members = 0;
    for (const auto &island : r.islands)
        for (const auto &g : island.members()) {
            ASSERT_TRUE(g.fitness.has_value());
            double again = evaluate(g, data.validation).mse;
            EXPECT_LE(std::abs(again - *g.fitness), 1e-10 * std::abs(*g.fitness));
            EXPECT_EQ(g.check_invariants(), "");
            ++members;
        }
    EXPECT_GT(members, 3u);
}

TEST(Search, SingleWorkerIsDeterministic) {
    TrainingData data = tiny_data();
    SearchResult a = run_search(tiny_search(2, 60, 4), data);
    SearchResult b = run_search(tiny_search(2, 60, 4), data);
    EXPECT_EQ(serialize(a.best), serialize(b.best));
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) {
        EXPECT_EQ(a.trace[k].best_mse, b.trace[k].best_mse);
        EXPECT_EQ(a.trace[k].island_id, b.trace[k].island_id);
    }
    SearchResult c = run_search(tiny_search(2, 60, 5), data);
    EXPECT_NE(serialize(a.best), serialize(c.best));
}

TEST(Search, ThreadedRunHonoursBudget) {
    TrainingData data = tiny_data();
    SearchConfig cfg = tiny_search(1, 60, 6);
    cfg.workers = 3;
    SearchResult r = run_search(cfg, data);
    EXPECT_EQ(r.trained_genomes, 60u);
    EXPECT_TRUE(r.best.fitness.has_value());
    for (std::size_t k = 1; k < r.trace.size(); ++k) EXPECT_LE(r.trace[k].best_mse, r.trace[k - 1].best_mse);
}

TEST(Search, RejectsMismatchedData) {
    TrainingData data = tiny_data();
    data.validation.inputs = Matrix(data.validation.inputs.rows(), 5);
    EXPECT_THROW(run_search(tiny_search(1, 10, 1), data), DimensionError);
    SearchConfig bad = tiny_search(1, 10, 1);
    bad.workers = 0;
    EXPECT_THROW(run_search(bad, tiny_data()), ConfigError);
}
