// SPDX-License-Identifier: Apache-2.0
#include <algorithm>

#include <fmt/format.h>

#include "evoforge/error.hpp"
#include "evoforge/experiment.hpp"

namespace evoforge {

namespace {

std::string rule_name(const WeightStrategy &s, InheritStrategy rule) {
    if (rule == InheritStrategy::Lamarckian) return "lamarckian";
    switch (s.initial) {
    case InitialStrategy::UniformRandom: return "uniform";
    case InitialStrategy::Xavier: return "xavier";
    case InitialStrategy::Kaiming: return "kaiming";
    }
    return "unknown";
}

std::string fmt_real(double v) { return fmt::format("{:.6e}", v); }

std::size_t strategy_rank(const std::string &code) {
    static const std::vector<WeightStrategy> order = all_strategies();
    auto s = WeightStrategy::parse(code);
    if (!s) throw DataError(fmt::format("record has unknown strategy '{}'", code));
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), *s) - order.begin());
}

} // namespace

std::vector<std::filesystem::path> render_reports(const std::vector<RunRecord> &unordered,
                                                  const std::filesystem::path &report_dir,
                                                  const ReportOptions &opts) {
    if (unordered.empty()) throw DataError("no run records to report");
    std::vector<RunRecord> records = unordered;
    std::stable_sort(records.begin(), records.end(), [](const RunRecord &a, const RunRecord &b) {
        return std::pair(strategy_rank(a.strategy), a.bp_epochs) < std::pair(strategy_rank(b.strategy), b.bp_epochs);
    });
    std::filesystem::create_directories(report_dir / "convergence");
    std::vector<std::filesystem::path> written;

    std::string summary =
        "strategy,initial,crossover,mutation,bp_epochs,repeats,genomes_per_search,avg_nodes,avg_edges,"
        "avg_rec_edges,worst_mae,avg_mae,best_mae\n";
    for (const auto &rec : records) {
        auto strategy = WeightStrategy::parse(rec.strategy);
        if (!strategy) throw DataError(fmt::format("record has unknown strategy '{}'", rec.strategy));
        RepeatSummary s = rec.summary();
        summary += fmt::format("{},{},{},{},{},{},{},{:.2f},{:.2f},{:.2f},{},{},{}\n", rec.strategy,
                               rule_name(*strategy, InheritStrategy::SameAsInitial),
                               rule_name(*strategy, strategy->crossover), rule_name(*strategy, strategy->mutation),
                               rec.bp_epochs, rec.repeats.size(), rec.total_epoch_budget / rec.bp_epochs, s.avg_nodes,
                               s.avg_edges, s.avg_rec_edges, fmt_real(s.worst_mae), fmt_real(s.avg_mae),
                               fmt_real(s.best_mae));

        std::string trace = "repeat,seed,inserted_count,trained_count,best_mse,island_id,genome_nodes,genome_edges,"
                            "genome_rec_edges\n";
        for (std::size_t k = 0; k < rec.repeats.size(); ++k) {
            const auto &rep = rec.repeats[k];
            for (const auto &t : rep.trace)
                trace += fmt::format("{},{},{},{},{},{},{},{},{}\n", k, rep.seed, t.inserted_count, t.trained_count,
                                     fmt_real(t.best_mse), t.island_id, t.genome_nodes, t.genome_edges,
                                     t.genome_rec_edges);
        }
        auto trace_path = report_dir / "convergence" / (rec.cell_name() + ".csv");
        write_file_atomic(trace_path, trace);
        written.push_back(trace_path);
    }
    auto summary_path = report_dir / "summary.csv";
    write_file_atomic(summary_path, summary);
    written.insert(written.begin(), summary_path);

    std::vector<int> budgets;
    for (const auto &rec : records)
        if (std::find(budgets.begin(), budgets.end(), rec.bp_epochs) == budgets.end()) budgets.push_back(rec.bp_epochs);
    for (int budget : budgets) {
        for (char family : {'R', 'X', 'K'}) {
            std::vector<std::pair<std::string, std::vector<double>>> groups;
            for (const auto &rec : records)
                if (rec.bp_epochs == budget && !rec.strategy.empty() && rec.strategy[0] == family)
                    groups.emplace_back(rec.strategy, rec.best_maes());
            if (groups.size() < 2) continue;
            PairwiseMatrix m = pairwise_matrix(groups, opts.sides, opts.alpha);
            auto stem = report_dir / fmt::format("umatrix_{}_e{}", family, budget);
            auto csv = stem;
            csv += ".csv";
            auto txt = stem;
            txt += ".txt";
            write_file_atomic(csv, to_csv(m));
            write_file_atomic(txt, to_text(m));
            written.push_back(csv);
            written.push_back(txt);
        }
    }
    return written;
}

} // namespace evoforge
