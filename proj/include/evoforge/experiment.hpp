// SPDX-License-Identifier: Apache-2.0
//
// Strategy x epoch-budget study. Every (strategy, budget) cell runs
// `repeats` searches seeded base_seed + repeat, all under the same total
// epoch budget, and is persisted as one JSON record so that interrupted
// plans resume at cell granularity.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "evoforge/data.hpp"
#include "evoforge/islands.hpp"
#include "evoforge/stats.hpp"
#include "evoforge/weights.hpp"

namespace evoforge {

struct ExperimentPlan {
    DatasetSpec dataset;
    std::vector<WeightStrategy> strategies;
    std::vector<int> epoch_budgets{1, 5, 10};
    std::int64_t total_epoch_budget = 2000;
    int repeats = 10;
    std::uint64_t base_seed = 1;
    /// Island, variation, training and weight settings shared by every search;
    /// strategy, budget and seed are filled in per cell.
    SearchConfig search;
    /// Number of searches run concurrently. Each search then uses search.workers.
    std::size_t parallel_searches = 1;

    void validate() const;
};

/// The 12 combinations of the three initializers with {initial, Lamarckian}
/// crossover and mutation rules.
std::vector<WeightStrategy> all_strategies();

struct RepeatRecord {
    std::uint64_t seed = 0;
    /// FNV-1a of the best genome's `.gnm` bytes, 16 hex digits.
    std::string digest;
    double best_mse = 0.0;
    double best_mae = 0.0;
    GeneCounts counts;
    std::size_t trained_genomes = 0;
    std::int64_t trained_epochs = 0;
    std::size_t diverged_genomes = 0;
    std::vector<TraceRecord> trace;
};

struct RunRecord {
    std::string strategy;
    int bp_epochs = 0;
    std::int64_t total_epoch_budget = 0;
    std::uint64_t base_seed = 0;
    std::vector<RepeatRecord> repeats;

    std::string cell_name() const;
    RepeatSummary summary() const;
    std::vector<double> best_maes() const;
};

std::string cell_name(const WeightStrategy &s, int bp_epochs);

std::string to_json(const RunRecord &r);
/// Throws DataError when the text is not a record.
RunRecord run_record_from_json(const std::string &text);

struct RepeatRunner {
    /// Called before each search starts.
    std::function<void(const std::string &cell, int repeat)> on_start;
    /// Called when a cell is complete, whether it ran or was loaded.
    std::function<void(const RunRecord &, bool resumed)> on_cell;
};

/// Runs every missing cell under `run_dir/cells/` and returns all records in
/// plan order (strategies outer, budgets inner). Existing records for the
/// same seeds and budget are loaded instead of re-run.
std::vector<RunRecord> run_plan(const ExperimentPlan &plan, const std::filesystem::path &run_dir,
                                const RepeatRunner &hooks = {});

struct ReportOptions {
    PairwiseSides sides = PairwiseSides::ObservedDirection;
    double alpha = 0.05;
};

/// Writes summary.csv, convergence/<cell>.csv and
/// umatrix_<initializer>_e<budget>.{csv,txt} under `report_dir`; returns the
/// written paths in creation order. Records are ordered as in all_strategies()
/// and then by budget, so the output does not depend on the input order.
std::vector<std::filesystem::path> render_reports(const std::vector<RunRecord> &records,
                                                  const std::filesystem::path &report_dir,
                                                  const ReportOptions &opts = {});

/// Writes `text` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path &path, const std::string &text);

} // namespace evoforge
