// SPDX-License-Identifier: Apache-2.0
#include "evoforge/islands.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "evoforge/error.hpp"

namespace evoforge {

void IslandConfig::validate() const {
    if (n_islands == 0) throw ConfigError("n_islands", "must be positive");
    if (capacity < 2) throw ConfigError("capacity", "must be at least 2");
    for (auto [key, p] : {std::pair{"p_mutation", p_mutation}, {"p_intra", p_intra}, {"p_inter", p_inter}})
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(key, "must lie in [0, 1]");
    if (std::abs(p_mutation + p_intra + p_inter - 1.0) > 1e-9)
        throw ConfigError("p_mutation", "reproduction probabilities must sum to 1");
}

std::size_t Budget::max_genomes() const {
    validate();
    return static_cast<std::size_t>(total_bp_epochs / bp_epochs_per_genome);
}

void Budget::validate() const {
    if (bp_epochs_per_genome < 1) throw ConfigError("bp_epochs", "must be at least 1");
    if (total_bp_epochs < bp_epochs_per_genome)
        throw ConfigError("total_bp_epochs", "must cover at least one genome");
}

void SearchConfig::validate() const {
    islands.validate();
    budget.validate();
    TrainConfig t = train;
    t.epochs = budget.bp_epochs_per_genome;
    t.validate();
    if (workers == 0) throw ConfigError("workers", "must be positive");
    if (variation.max_new_fan < 1) throw ConfigError("max_new_fan", "must be positive");
    if (variation.max_time_skip < 1) throw ConfigError("max_time_skip", "must be positive");
    if (variation.retry_bound < 1) throw ConfigError("retry_bound", "must be positive");
}

namespace {

bool ranks_before(const Genome &a, const Genome &b) {
    if (*a.fitness != *b.fitness) return *a.fitness < *b.fitness;
    return a.generation_id < b.generation_id;
}

} // namespace

bool Island::insert(Genome g) {
    if (!g.fitness) throw MissingFitnessError("only evaluated genomes can enter an island");
    const std::uint64_t hash = structural_hash(g);
    auto dup = std::find_if(members_.begin(), members_.end(),
                            [&](const Genome &m) { return structural_hash(m) == hash; });
    if (dup != members_.end()) {
        if (!(*g.fitness < *dup->fitness)) return false;
        *dup = std::move(g);
    } else if (members_.size() < capacity_) {
        members_.push_back(std::move(g));
    } else if (*g.fitness < *members_.back().fitness) {
        members_.back() = std::move(g);
    } else {
        return false;
    }
    std::stable_sort(members_.begin(), members_.end(), ranks_before);
    return true;
}

std::string_view to_string(ReproductionKind kind) {
    switch (kind) {
    case ReproductionKind::Mutation: return "mutation";
    case ReproductionKind::IntraCrossover: return "intra_island_crossover";
    case ReproductionKind::InterCrossover: return "inter_island_crossover";
    }
    return "unknown";
}

Population::Population(std::size_t n_islands, std::size_t capacity) {
    islands.reserve(n_islands);
    for (std::size_t i = 0; i < n_islands; ++i) islands.emplace_back(i, capacity);
}

bool Population::empty() const {
    return std::all_of(islands.begin(), islands.end(), [](const Island &i) { return i.empty(); });
}

std::size_t Population::genome_count() const {
    std::size_t n = 0;
    for (const auto &i : islands) n += i.size();
    return n;
}

const Genome *Population::best() const {
    const Genome *out = nullptr;
    for (const auto &i : islands)
        if (!i.empty() && (!out || ranks_before(i.best(), *out))) out = &i.best();
    return out;
}

ChildRequest generate_child(Population &pop, const IslandConfig &cfg, const WeightPolicy &policy,
                            const VariationConfig &vcfg, InnovationCounter &counter, Rng &rng) {
    if (pop.empty()) throw NotSeededError("no island holds a trained genome");
    const std::size_t n = pop.islands.size();
    std::size_t origin = pop.next_origin % n;
    while (pop.islands[origin].empty()) origin = (origin + 1) % n;
    pop.next_origin = (origin + 1) % n;
    const Island &island = pop.islands[origin];

    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < n; ++i)
        if (i != origin && !pop.islands[i].empty()) others.push_back(i);

    double u = uniform01(rng);
    ReproductionKind kind = ReproductionKind::Mutation;
    if (u >= cfg.p_mutation) kind = u < cfg.p_mutation + cfg.p_intra ? ReproductionKind::IntraCrossover
                                                                      : ReproductionKind::InterCrossover;
    if (kind == ReproductionKind::IntraCrossover && island.size() < 2) kind = ReproductionKind::Mutation;
    if (kind == ReproductionKind::InterCrossover && others.empty()) kind = ReproductionKind::Mutation;

    ChildRequest req;
    req.island = origin;
    req.kind = kind;
    const auto &members = island.members();
    const Genome &first = members[pick_index(rng, members.size())];
    req.parent_islands = {origin, origin};
    switch (kind) {
    case ReproductionKind::Mutation:
        req.child = mutate_random(first, policy, vcfg, counter, rng).child;
        break;
    case ReproductionKind::IntraCrossover: {
        std::size_t a = static_cast<std::size_t>(&first - members.data());
        std::size_t b = pick_index(rng, members.size() - 1);
        if (b >= a) ++b;
        req.child = crossover(first, members[b], policy, rng);
        break;
    }
    case ReproductionKind::InterCrossover: {
        std::size_t other = others[pick_index(rng, others.size())];
        const auto &pool = pop.islands[other].members();
        req.child = crossover(first, pool[pick_index(rng, pool.size())], policy, rng);
        req.parent_islands[1] = other;
        break;
    }
    }
    req.child.island_of_origin = static_cast<std::int32_t>(origin);
    return req;
}

namespace {

/// Trains submitted genomes. With one worker training happens inside next().
class TrainingPool {
  public:
    TrainingPool(std::size_t workers, const TrainingData &data, const TrainConfig &cfg)
        : data_(data), cfg_(cfg), inline_(workers <= 1) {
        if (inline_) return;
        for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this] { work(); });
    }

    ~TrainingPool() {
        {
            std::lock_guard lock(mutex_);
            stop_ = true;
        }
        work_cv_.notify_all();
        for (auto &t : threads_) t.join();
    }

    void submit(Genome g) {
        ++in_flight_;
        if (inline_) {
            queue_.push_back(std::move(g));
            return;
        }
        {
            std::lock_guard lock(mutex_);
            queue_.push_back(std::move(g));
        }
        work_cv_.notify_one();
    }

    std::size_t in_flight() const noexcept { return in_flight_; }

    Genome next() {
        --in_flight_;
        if (inline_) {
            Genome g = std::move(queue_.front());
            queue_.pop_front();
            return train(std::move(g), data_, cfg_);
        }
        std::unique_lock lock(mutex_);
        done_cv_.wait(lock, [&] { return !done_.empty() || error_; });
        if (error_) std::rethrow_exception(error_);
        Genome g = std::move(done_.front());
        done_.pop_front();
        return g;
    }

  private:
    void work() {
        for (;;) {
            Genome g;
            {
                std::unique_lock lock(mutex_);
                work_cv_.wait(lock, [&] { return stop_ || !queue_.empty(); });
                if (stop_) return;
                g = std::move(queue_.front());
                queue_.pop_front();
            }
            try {
                Genome trained = train(std::move(g), data_, cfg_);
                std::lock_guard lock(mutex_);
                done_.push_back(std::move(trained));
            } catch (...) {
                std::lock_guard lock(mutex_);
                if (!error_) error_ = std::current_exception();
            }
            done_cv_.notify_one();
        }
    }

    const TrainingData &data_;
    TrainConfig cfg_;
    bool inline_;
    std::size_t in_flight_ = 0;
    std::vector<std::thread> threads_;
    std::mutex mutex_;
    std::condition_variable work_cv_, done_cv_;
    std::deque<Genome> queue_;
    std::deque<Genome> done_;
    std::exception_ptr error_;
    bool stop_ = false;
};

} // namespace

SearchResult run_search(const SearchConfig &cfg, const TrainingData &data, const InsertObserver &observer) {
    cfg.validate();
    const std::size_t n_in = data.train.inputs.cols();
    const std::size_t n_out = data.train.targets.cols();
    if (data.validation.inputs.cols() != n_in || data.validation.targets.cols() != n_out)
        throw DimensionError("training and validation column counts differ");

    TrainConfig tcfg = cfg.train;
    tcfg.epochs = cfg.budget.bp_epochs_per_genome;
    const std::size_t max_genomes = cfg.budget.max_genomes();

    Rng rng = make_rng(cfg.seed);
    InnovationCounter counter;
    const Genome seed_structure = seed_genome(n_in, n_out, counter);
    Population pop(cfg.islands.n_islands, cfg.islands.capacity);
    TrainingPool pool(cfg.workers, data, tcfg);

    SearchResult result;
    std::optional<Genome> best;
    std::size_t dispatched = 0;
    std::size_t reseeds = 0;
    std::int64_t generation = 0;

    auto fresh_seed = [&](std::size_t island) {
        Genome g = initialize_genome_weights(seed_structure, cfg.policy.strategy.initial, cfg.policy.config, rng);
        g.island_of_origin = static_cast<std::int32_t>(island);
        return g;
    };

    while (result.trained_genomes < max_genomes) {
        while (pool.in_flight() < cfg.workers && dispatched < max_genomes) {
            Genome child;
            if (dispatched < cfg.islands.n_islands) child = fresh_seed(dispatched);
            else if (pop.empty()) child = fresh_seed(reseeds++ % cfg.islands.n_islands);
            else child = generate_child(pop, cfg.islands, cfg.policy, cfg.variation, counter, rng).child;
            child.generation_id = generation++;
            pool.submit(std::move(child));
            ++dispatched;
        }

        Genome g = pool.next();
        ++result.trained_genomes;
        result.trained_epochs += tcfg.epochs;
        if (g.diverged || !g.fitness || !std::isfinite(*g.fitness)) {
            ++result.diverged_genomes;
            continue;
        }
        const auto island = static_cast<std::size_t>(g.island_of_origin);
        if (!best || ranks_before(g, *best)) best = g;
        GeneCounts counts = g.enabled_counts();
        if (!pop.islands[island].insert(std::move(g))) continue;

        ++result.inserted_genomes;
        TraceRecord rec{result.inserted_genomes, result.trained_genomes, *best->fitness, island,
                        counts.nodes,            counts.edges,           counts.rec_edges};
        result.trace.push_back(rec);
        if (observer) observer(rec, pop);
    }

    if (best) {
        result.best = *best;
    } else {
        result.best = seed_structure;
        result.best.diverged = true;
        result.best.fitness = std::numeric_limits<double>::infinity();
    }
    result.best_counts = result.best.enabled_counts();
    result.islands = pop.islands;
    return result;
}

} // namespace evoforge
