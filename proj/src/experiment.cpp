// SPDX-License-Identifier: Apache-2.0
#include "evoforge/experiment.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <json.hpp>

#include "evoforge/error.hpp"
#include "evoforge/genome_io.hpp"

namespace evoforge {

using nlohmann::json;

namespace {

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json &j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json trace_to_json(const std::vector<TraceRecord> &trace) {
    json rows = json::array();
    for (const auto &t : trace)
        rows.push_back({t.inserted_count, t.trained_count, number(t.best_mse), t.island_id, t.genome_nodes,
                        t.genome_edges, t.genome_rec_edges});
    return rows;
}

std::vector<TraceRecord> trace_from_json(const json &rows) {
    std::vector<TraceRecord> out;
    for (const auto &r : rows)
        out.push_back({r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>(), number_from(r.at(2)),
                       r.at(3).get<std::size_t>(), r.at(4).get<std::size_t>(), r.at(5).get<std::size_t>(),
                       r.at(6).get<std::size_t>()});
    return out;
}

std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RepeatRecord run_repeat(const ExperimentPlan &plan, const TrainingData &data, const WeightStrategy &strategy,
                        int bp_epochs, int repeat) {
    SearchConfig cfg = plan.search;
    cfg.policy.strategy = strategy;
    cfg.budget = {bp_epochs, plan.total_epoch_budget};
    cfg.seed = plan.base_seed + static_cast<std::uint64_t>(repeat);
    SearchResult r = run_search(cfg, data);
    RepeatRecord rec;
    rec.seed = cfg.seed;
    rec.digest = fmt::format("{:016x}", genome_digest(r.best));
    rec.best_mse = r.best.fitness.value_or(std::numeric_limits<double>::infinity());
    rec.best_mae = r.best.mae.value_or(std::numeric_limits<double>::infinity());
    rec.counts = r.best_counts;
    rec.trained_genomes = r.trained_genomes;
    rec.trained_epochs = r.trained_epochs;
    rec.diverged_genomes = r.diverged_genomes;
    rec.trace = std::move(r.trace);
    return rec;
}

} // namespace

void ExperimentPlan::validate() const {
    if (strategies.empty()) throw ConfigError("strategies", "at least one strategy is required");
    for (std::size_t i = 0; i < strategies.size(); ++i)
        for (std::size_t j = i + 1; j < strategies.size(); ++j)
            if (strategies[i] == strategies[j])
                throw ConfigError("strategies", fmt::format("'{}' is listed twice", strategies[i].code()));
    if (epoch_budgets.empty()) throw ConfigError("budgets", "at least one epoch budget is required");
    for (int b : epoch_budgets) {
        if (b < 1) throw ConfigError("budgets", "epoch budgets must be positive");
        if (b > total_epoch_budget) throw ConfigError("budgets", fmt::format("budget {} exceeds the total", b));
    }
    if (repeats < 1) throw ConfigError("repeats", "must be positive");
    if (parallel_searches < 1) throw ConfigError("parallel_searches", "must be positive");
    SearchConfig probe = search;
    probe.budget = {epoch_budgets.front(), total_epoch_budget};
    probe.validate();
}

std::vector<WeightStrategy> all_strategies() {
    std::vector<WeightStrategy> out;
    for (InitialStrategy init : {InitialStrategy::UniformRandom, InitialStrategy::Xavier, InitialStrategy::Kaiming})
        for (InheritStrategy c : {InheritStrategy::SameAsInitial, InheritStrategy::Lamarckian})
            for (InheritStrategy m : {InheritStrategy::SameAsInitial, InheritStrategy::Lamarckian})
                out.push_back({init, c, m});
    return out;
}

std::string cell_name(const WeightStrategy &s, int bp_epochs) { return fmt::format("{}_e{}", s.code(), bp_epochs); }

std::string RunRecord::cell_name() const { return fmt::format("{}_e{}", strategy, bp_epochs); }

std::vector<double> RunRecord::best_maes() const {
    std::vector<double> out;
    for (const auto &r : repeats) out.push_back(r.best_mae);
    return out;
}

RepeatSummary RunRecord::summary() const {
    std::vector<RepeatOutcome> outcomes;
    for (const auto &r : repeats) outcomes.push_back({r.best_mae, r.counts});
    return summarize(strategy, bp_epochs, outcomes);
}

std::string to_json(const RunRecord &r) {
    json j;
    j["strategy"] = r.strategy;
    j["bp_epochs"] = r.bp_epochs;
    j["total_epoch_budget"] = r.total_epoch_budget;
    j["base_seed"] = r.base_seed;
    j["repeats"] = json::array();
    for (const auto &rep : r.repeats) {
        j["repeats"].push_back({{"seed", rep.seed},
                                {"digest", rep.digest},
                                {"best_mse", number(rep.best_mse)},
                                {"best_mae", number(rep.best_mae)},
                                {"nodes", rep.counts.nodes},
                                {"edges", rep.counts.edges},
                                {"rec_edges", rep.counts.rec_edges},
                                {"hidden", rep.counts.hidden},
                                {"trained_genomes", rep.trained_genomes},
                                {"trained_epochs", rep.trained_epochs},
                                {"diverged_genomes", rep.diverged_genomes},
                                {"trace", trace_to_json(rep.trace)}});
    }
    return j.dump(1) + "\n";
}

RunRecord run_record_from_json(const std::string &text) {
    try {
        json j = json::parse(text);
        RunRecord r;
        r.strategy = j.at("strategy").get<std::string>();
        r.bp_epochs = j.at("bp_epochs").get<int>();
        r.total_epoch_budget = j.at("total_epoch_budget").get<std::int64_t>();
        r.base_seed = j.at("base_seed").get<std::uint64_t>();
        for (const auto &rep : j.at("repeats")) {
            RepeatRecord x;
            x.seed = rep.at("seed").get<std::uint64_t>();
            x.digest = rep.at("digest").get<std::string>();
            x.best_mse = number_from(rep.at("best_mse"));
            x.best_mae = number_from(rep.at("best_mae"));
            x.counts = {rep.at("nodes").get<std::size_t>(), rep.at("edges").get<std::size_t>(),
                        rep.at("rec_edges").get<std::size_t>(), rep.at("hidden").get<std::size_t>()};
            x.trained_genomes = rep.at("trained_genomes").get<std::size_t>();
            x.trained_epochs = rep.at("trained_epochs").get<std::int64_t>();
            x.diverged_genomes = rep.at("diverged_genomes").get<std::size_t>();
            x.trace = trace_from_json(rep.at("trace"));
            r.repeats.push_back(std::move(x));
        }
        return r;
    } catch (const json::exception &e) {
        throw DataError(fmt::format("malformed run record: {}", e.what()));
    }
}

void write_file_atomic(const std::filesystem::path &path, const std::string &text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError(fmt::format("cannot write {}", tmp.string()));
        out << text;
        if (!out.flush()) throw DataError(fmt::format("cannot write {}", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

std::vector<RunRecord> run_plan(const ExperimentPlan &plan, const std::filesystem::path &run_dir,
                                const RepeatRunner &hooks) {
    plan.validate();
    const auto cells_dir = run_dir / "cells";
    std::filesystem::create_directories(cells_dir);

    std::vector<RunRecord> records;
    std::optional<TrainingData> data;
    for (const auto &strategy : plan.strategies) {
        for (int budget : plan.epoch_budgets) {
            const std::string name = cell_name(strategy, budget);
            const auto path = cells_dir / (name + ".json");
            if (std::filesystem::exists(path)) {
                try {
                    RunRecord existing = run_record_from_json(read_file(path));
                    bool same = existing.strategy == strategy.code() && existing.bp_epochs == budget &&
                                existing.total_epoch_budget == plan.total_epoch_budget &&
                                existing.base_seed == plan.base_seed &&
                                existing.repeats.size() == static_cast<std::size_t>(plan.repeats);
                    if (same) {
                        if (hooks.on_cell) hooks.on_cell(existing, true);
                        records.push_back(std::move(existing));
                        continue;
                    }
                } catch (const DataError &) {
                    // unreadable leftovers are recomputed
                }
            }
            if (!data) data = prepare_training_data(plan.dataset);

            RunRecord rec;
            rec.strategy = strategy.code();
            rec.bp_epochs = budget;
            rec.total_epoch_budget = plan.total_epoch_budget;
            rec.base_seed = plan.base_seed;
            rec.repeats.resize(static_cast<std::size_t>(plan.repeats));

            std::atomic<int> next{0};
            std::mutex hook_mutex;
            std::exception_ptr failure;
            auto worker = [&] {
                for (int k; (k = next.fetch_add(1)) < plan.repeats;) {
                    {
                        std::lock_guard lock(hook_mutex);
                        if (failure) return;
                        if (hooks.on_start) hooks.on_start(name, k);
                    }
                    try {
                        rec.repeats[static_cast<std::size_t>(k)] = run_repeat(plan, *data, strategy, budget, k);
                    } catch (...) {
                        std::lock_guard lock(hook_mutex);
                        if (!failure) failure = std::current_exception();
                        return;
                    }
                }
            };
            const std::size_t n_threads =
                std::min<std::size_t>(plan.parallel_searches, static_cast<std::size_t>(plan.repeats));
            if (n_threads <= 1) {
                worker();
            } else {
                std::vector<std::thread> threads;
                for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
                for (auto &t : threads) t.join();
            }
            if (failure) std::rethrow_exception(failure);

            write_file_atomic(path, to_json(rec));
            if (hooks.on_cell) hooks.on_cell(rec, false);
            records.push_back(std::move(rec));
        }
    }
    return records;
}

} // namespace evoforge
