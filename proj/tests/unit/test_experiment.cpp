// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "evoforge/error.hpp"
#include "evoforge/experiment.hpp"

using namespace evoforge;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string &name) {
    fs::path dir = fs::temp_directory_path() / ("evoforge_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentPlan tiny_plan(std::vector<std::string> codes, std::vector<int> budgets, std::int64_t total, int repeats) {
    ExperimentPlan plan;
    plan.dataset.synthetic = "sine_mix";
    plan.dataset.length = 120;
    for (const auto &c : codes) plan.strategies.push_back(*WeightStrategy::parse(c));
    plan.epoch_budgets = std::move(budgets);
    plan.total_epoch_budget = total;
    plan.repeats = repeats;
    plan.base_seed = 40;
    plan.search.islands.n_islands = 2;
    plan.search.islands.capacity = 3;
    return plan;
}

} // namespace

TEST(Strategies, TwelveCombinations) {
    auto all = all_strategies();
    ASSERT_EQ(all.size(), 12u);
    std::set<std::string> codes;
    for (const auto &s : all) codes.insert(s.code());
    EXPECT_EQ(codes.size(), 12u);
    for (const char *c : {"R-R-R", "R-L-L", "X-X-X", "X-L-L", "X-X-L", "K-L-K", "K-K-K"})
        EXPECT_TRUE(codes.count(c)) << c;
    EXPECT_EQ(all.front().code(), "R-R-R");
    EXPECT_EQ(cell_name(all.back(), 5), "K-L-L_e5");
}

TEST(Plan, Validation) {
    ExperimentPlan plan = tiny_plan({"X-L-L"}, {1}, 10, 1);
    EXPECT_NO_THROW(plan.validate());
    auto expect_key = [](const ExperimentPlan &p, const std::string &key) {
        try {
            p.validate();
            ADD_FAILURE() << "accepted bad " << key;
        } catch (const ConfigError &e) {
            EXPECT_EQ(e.key(), key);
        }
    };
    ExperimentPlan bad = plan;
    bad.strategies.clear();
    expect_key(bad, "strategies");
    bad = plan;
    bad.strategies.push_back(bad.strategies.front());
    expect_key(bad, "strategies");
    bad = plan;
    bad.epoch_budgets = {20};
    expect_key(bad, "budgets");
    bad = plan;
    bad.repeats = 0;
    expect_key(bad, "repeats");
}

TEST(Plan, BudgetArithmetic) {
    ExperimentPlan plan = tiny_plan({"X-L-L"}, {1, 5}, 100, 1);
    auto records = run_plan(plan, fresh_dir("budget"));
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].repeats[0].trained_genomes, 100u);
    EXPECT_EQ(records[1].repeats[0].trained_genomes, 20u);
    for (const auto &r : records) EXPECT_EQ(r.repeats[0].trained_epochs, 100);
}

TEST(Plan, SearchCountAndSeeds) {
    ExperimentPlan plan = tiny_plan({"X-L-L", "R-R-R"}, {1, 2}, 12, 3);
    int searches = 0;
    RepeatRunner hooks;
    hooks.on_start = [&](const std::string &, int) { ++searches; };
    auto records = run_plan(plan, fresh_dir("count"), hooks);
    EXPECT_EQ(searches, 12);
    ASSERT_EQ(records.size(), 4u);
    EXPECT_EQ(records[0].cell_name(), "X-L-L_e1");
    EXPECT_EQ(records[1].cell_name(), "X-L-L_e2");
    EXPECT_EQ(records[2].cell_name(), "R-R-R_e1");
    std::int64_t epochs = 0;
    for (const auto &r : records) {
        ASSERT_EQ(r.repeats.size(), 3u);
        for (int k = 0; k < 3; ++k) EXPECT_EQ(r.repeats[static_cast<std::size_t>(k)].seed, 40u + static_cast<unsigned>(k));
        for (const auto &rep : r.repeats) epochs += rep.trained_epochs;
    }
    EXPECT_EQ(epochs, 4 * 3 * 12);
}

TEST(Plan, ResumeSkipsFinishedCells) {
    fs::path dir = fresh_dir("resume");
    ExperimentPlan plan = tiny_plan({"X-L-L", "X-X-X"}, {2}, 16, 2);
    ExperimentPlan first = plan;
    first.strategies.pop_back();
    auto done = run_plan(first, dir);

    std::vector<std::string> started;
    std::vector<bool> resumed;
    RepeatRunner hooks;
    hooks.on_start = [&](const std::string &cell, int) { started.push_back(cell); };
    hooks.on_cell = [&](const RunRecord &, bool was_resumed) { resumed.push_back(was_resumed); };
    auto all = run_plan(plan, dir, hooks);
    EXPECT_EQ(started, (std::vector<std::string>{"X-X-X_e2", "X-X-X_e2"}));
    EXPECT_EQ(resumed, (std::vector<bool>{true, false}));
    EXPECT_EQ(all[0].repeats[1].digest, done[0].repeats[1].digest);
}

TEST(Plan, RerunReproducesDigests) {
    ExperimentPlan plan = tiny_plan({"K-L-L"}, {2}, 16, 2);
    auto a = run_plan(plan, fresh_dir("rerun_a"));
    auto b = run_plan(plan, fresh_dir("rerun_b"));
    for (std::size_t k = 0; k < 2; ++k) EXPECT_EQ(a[0].repeats[k].digest, b[0].repeats[k].digest);
    EXPECT_EQ(a[0].repeats[0].digest.size(), 16u);
}

TEST(Plan, ParallelSearchesMatchSequential) {
    ExperimentPlan plan = tiny_plan({"X-L-L"}, {2}, 16, 3);
    auto seq = run_plan(plan, fresh_dir("seq"));
    plan.parallel_searches = 3;
    auto par = run_plan(plan, fresh_dir("par"));
    EXPECT_EQ(to_json(seq[0]), to_json(par[0]));
}

TEST(Record, JsonRoundTrip) {
    RunRecord r;
    r.strategy = "X-L-L";
    r.bp_epochs = 5;
    r.total_epoch_budget = 100;
    r.base_seed = 3;
    RepeatRecord rep;
    rep.seed = 3;
    rep.digest = "0123456789abcdef";
    rep.best_mse = 0.1234567890123;
    rep.best_mae = std::numeric_limits<double>::infinity();
    rep.counts = {5, 6, 1, 2};
    rep.trained_genomes = 20;
    rep.trained_epochs = 100;
    rep.diverged_genomes = 1;
    rep.trace = {{1, 1, 0.5, 0, 3, 2, 0}, {2, 4, 0.25, 1, 4, 4, 1}};
    r.repeats = {rep};
    RunRecord back = run_record_from_json(to_json(r));
    EXPECT_EQ(to_json(back), to_json(r));
    EXPECT_EQ(back.repeats[0].best_mse, rep.best_mse);
    EXPECT_TRUE(std::isinf(back.repeats[0].best_mae));
    EXPECT_EQ(back.repeats[0].counts, rep.counts);
    EXPECT_EQ(back.repeats[0].trace[1].genome_rec_edges, 1u);
    EXPECT_THROW(run_record_from_json("{\"strategy\": 3}"), DataError);
    EXPECT_THROW(run_record_from_json("not json"), DataError);
}

TEST(Reports, FilesAndRerenderIsByteIdentical) {
    fs::path dir = fresh_dir("reports");
    ExperimentPlan plan = tiny_plan({"X-L-L", "X-X-X", "K-K-K"}, {1, 2}, 12, 3);
    auto records = run_plan(plan, dir);
    auto written = render_reports(records, dir / "reports");

    std::string summary = slurp(dir / "reports" / "summary.csv");
    std::size_t lines = std::count(summary.begin(), summary.end(), '\n');
    EXPECT_EQ(lines, 1u + 3 * 2);
    EXPECT_EQ(summary.rfind("strategy,initial,crossover,mutation,bp_epochs", 0), 0u);
    EXPECT_NE(summary.find("X-L-L,xavier,lamarckian,lamarckian,1,3,12,"), std::string::npos);

    for (const char *f : {"umatrix_X_e1.csv", "umatrix_X_e1.txt", "umatrix_X_e2.csv", "umatrix_X_e2.txt"})
        EXPECT_TRUE(fs::exists(dir / "reports" / f)) << f;
    EXPECT_FALSE(fs::exists(dir / "reports" / "umatrix_K_e1.csv")) << "a lone strategy has nothing to compare";
    EXPECT_EQ(written.size(), 1u + 6u + 4u);

    std::ifstream trace(dir / "reports" / "convergence" / "X-L-L_e2.csv");
    std::string line;
    std::getline(trace, line);
    EXPECT_EQ(line, "repeat,seed,inserted_count,trained_count,best_mse,island_id,genome_nodes,genome_edges,"
                    "genome_rec_edges");
    int last_repeat = -1;
    double running = 0.0;
    while (std::getline(trace, line)) {
        std::stringstream ss(line);
        std::string field;
        std::vector<std::string> f;
        while (std::getline(ss, field, ',')) f.push_back(field);
        int repeat = std::stoi(f[0]);
        double best = std::stod(f[4]);
        if (repeat == last_repeat) EXPECT_LE(best, running);
        last_repeat = repeat;
        running = best;
    }

    std::string before = summary + slurp(dir / "reports" / "umatrix_X_e2.txt");
    std::vector<RunRecord> reversed(records.rbegin(), records.rend());
    std::vector<RunRecord> reloaded;
    for (const auto &r : reversed) reloaded.push_back(run_record_from_json(to_json(r)));
    render_reports(reloaded, dir / "again");
    EXPECT_EQ(slurp(dir / "again" / "summary.csv") + slurp(dir / "again" / "umatrix_X_e2.txt"), before);
    EXPECT_EQ(slurp(dir / "again" / "convergence" / "K-K-K_e1.csv"),
              slurp(dir / "reports" / "convergence" / "K-K-K_e1.csv"));
    EXPECT_THROW(render_reports({}, dir / "none"), DataError);
}

TEST(Reports, AtomicWriteReplaces) {
    fs::path dir = fresh_dir("atomic");
    fs::create_directories(dir);
    write_file_atomic(dir / "f.txt", "one");
    write_file_atomic(dir / "f.txt", "two");
    EXPECT_EQ(slurp(dir / "f.txt"), "two");
    std::size_t entries = std::distance(fs::directory_iterator(dir), fs::directory_iterator{});
    EXPECT_EQ(entries, 1u);
}
