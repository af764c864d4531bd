// SPDX-License-Identifier: Apache-2.0
#include "evoforge/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "evoforge/data.hpp"
#include "evoforge/error.hpp"
#include "evoforge/experiment.hpp"
#include "evoforge/genome_io.hpp"
#include "evoforge/islands.hpp"
#include "evoforge/stats.hpp"
#include "evoforge/weights.hpp"

namespace evoforge::cli {

namespace {

using nlohmann::json;

struct DatasetOpts {
    std::string dataset = "mackey_glass";
    std::string csv;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    bool allow_overlap = false;
    std::size_t length = 2000;
    std::uint64_t data_seed = 1;
    std::optional<double> noise;
    double split_fraction = 2.0 / 3.0;
    std::string constant_columns = "error";
};

struct EngineOpts {
    IslandConfig islands;
    TrainConfig train;
    VariationConfig variation;
    WeightConfig weights;
    bool split_edge = false;
    std::int64_t total_bp_epochs = 2000;
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
};

struct SearchOpts {
    DatasetOpts data;
    EngineOpts engine;
    std::string strategy = "X-L-L";
    int bp_epochs = 10;
    std::uint64_t seed = 0;
    std::string out_dir = "search_out";
};

struct ExperimentOpts {
    DatasetOpts data;
    EngineOpts engine;
    std::vector<std::string> strategies;
    std::vector<int> budgets{1, 5, 10};
    int repeats = 10;
    std::uint64_t seed = 1;
    std::size_t parallel_searches = 1;
    std::string sides = "observed";
    double alpha = 0.05;
    std::string out_dir = "experiment_out";
};

struct InspectOpts {
    std::string file;
};

struct SynthOpts {
    std::string kind = "mackey_glass";
    std::size_t length = 2000;
    std::uint64_t seed = 1;
    std::optional<double> noise;
    std::string out_dir = ".";
};

struct StatsOpts {
    std::vector<std::string> files;
    std::string alternative = "less";
    std::string sides = "observed";
    double alpha = 0.05;
    std::string run_dir;
    std::string out_dir;
};

void add_dataset_options(CLI::App *app, DatasetOpts &o) {
    app->add_option("--dataset", o.dataset, "synthetic generator: sine_mix, mackey_glass, noisy_ar");
    app->add_option("--csv", o.csv, "CSV file; replaces the synthetic generator");
    app->add_option("--inputs", o.inputs, "input column names")->delimiter(',');
    app->add_option("--outputs", o.outputs, "output column names")->delimiter(',');
    app->add_flag("--allow_overlap", o.allow_overlap, "allow a column to be both input and output");
    app->add_option("--length", o.length, "synthetic series length");
    app->add_option("--data_seed", o.data_seed, "synthetic series seed");
    app->add_option("--noise", o.noise, "synthetic noise standard deviation");
    app->add_option("--split_fraction", o.split_fraction, "training share of the chronological split");
    app->add_option("--constant_columns", o.constant_columns, "error, drop or pass_through");
}

void add_engine_options(CLI::App *app, EngineOpts &o) {
    app->add_option("--total_bp_epochs", o.total_bp_epochs, "total backpropagation epochs per search");
    app->add_option("--n_islands", o.islands.n_islands);
    app->add_option("--capacity", o.islands.capacity);
    app->add_option("--p_mutation", o.islands.p_mutation);
    app->add_option("--p_intra", o.islands.p_intra);
    app->add_option("--p_inter", o.islands.p_inter);
    app->add_option("--learning_rate", o.train.learning_rate);
    app->add_option("--momentum", o.train.momentum);
    app->add_option("--window", o.train.window, "BPTT truncation window");
    app->add_option("--grad_clip_high", o.train.grad_clip_high);
    app->add_option("--grad_boost_low", o.train.grad_boost_low);
    app->add_option("--max_new_fan", o.variation.max_new_fan);
    app->add_option("--max_time_skip", o.variation.max_time_skip);
    app->add_option("--retry_bound", o.variation.retry_bound);
    app->add_flag("--split_edge", o.split_edge, "enable the split-edge mutation");
    app->add_option("--uniform_lo", o.weights.uniform_lo);
    app->add_option("--uniform_hi", o.weights.uniform_hi);
    app->add_flag("--kaiming_canonical", o.weights.kaiming_canonical, "use sqrt(2 / fan_in)");
    app->add_option("--forget_bias_offset", o.weights.forget_bias_offset);
    app->add_option("--workers", o.workers, "training threads");
}

DatasetSpec to_spec(const DatasetOpts &o) {
    DatasetSpec s;
    s.synthetic = o.dataset;
    s.csv_path = o.csv;
    s.inputs = o.inputs;
    s.outputs = o.outputs;
    s.allow_overlap = o.allow_overlap;
    s.length = o.length;
    s.seed = o.data_seed;
    s.noise = o.noise;
    s.split_fraction = o.split_fraction;
    auto policy = constant_policy_from_string(o.constant_columns);
    if (!policy) throw ConfigError("constant_columns", fmt::format("unknown policy '{}'", o.constant_columns));
    s.constant_columns = *policy;
    return s;
}

WeightStrategy parse_strategy(const std::string &code, const char *key) {
    auto s = WeightStrategy::parse(code);
    if (!s) throw ConfigError(key, fmt::format("unknown strategy code '{}'", code));
    return *s;
}

SearchConfig to_search_config(const EngineOpts &o) {
    SearchConfig c;
    c.islands = o.islands;
    c.train = o.train;
    c.variation = o.variation;
    c.variation.set_enabled(MutationKind::SplitEdge, o.split_edge);
    c.policy.config = o.weights;
    c.budget.total_bp_epochs = o.total_bp_epochs;
    c.workers = o.workers;
    return c;
}

PairwiseSides parse_sides(const std::string &s) {
    if (s == "observed") return PairwiseSides::ObservedDirection;
    if (s == "two_sided") return PairwiseSides::TwoSided;
    throw ConfigError("sides", fmt::format("expected observed or two_sided, got '{}'", s));
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string real(double v) { return fmt::format("{:.9e}", v); }

int cmd_search(const SearchOpts &o, std::ostream &out) {
    SearchConfig cfg = to_search_config(o.engine);
    cfg.policy.strategy = parse_strategy(o.strategy, "strategy");
    cfg.budget.bp_epochs_per_genome = o.bp_epochs;
    cfg.seed = o.seed;
    cfg.validate();
    DatasetSpec spec = to_spec(o.data);
    TrainingData data = prepare_training_data(spec);

    SearchResult r = run_search(cfg, data);

    std::filesystem::path dir = o.out_dir;
    std::filesystem::create_directories(dir);
    write_genome_file(dir / "best.gnm", r.best);

    std::string trace = "inserted_count,trained_count,best_mse,island_id,genome_nodes,genome_edges,genome_rec_edges\n";
    for (const auto &t : r.trace)
        trace += fmt::format("{},{},{},{},{},{},{}\n", t.inserted_count, t.trained_count, real(t.best_mse), t.island_id,
                             t.genome_nodes, t.genome_edges, t.genome_rec_edges);
    write_file_atomic(dir / "trace.csv", trace);

    const double inf = std::numeric_limits<double>::infinity();
    json j;
    j["strategy"] = cfg.policy.strategy.code();
    j["bp_epochs"] = cfg.budget.bp_epochs_per_genome;
    j["total_bp_epochs"] = cfg.budget.total_bp_epochs;
    j["seed"] = cfg.seed;
    j["best_mse"] = number(r.best.fitness.value_or(inf));
    j["best_mae"] = number(r.best.mae.value_or(inf));
    j["diverged"] = r.best.diverged;
    j["nodes"] = r.best_counts.nodes;
    j["edges"] = r.best_counts.edges;
    j["rec_edges"] = r.best_counts.rec_edges;
    j["hidden"] = r.best_counts.hidden;
    j["trained_genomes"] = r.trained_genomes;
    j["trained_epochs"] = r.trained_epochs;
    j["inserted_genomes"] = r.inserted_genomes;
    j["diverged_genomes"] = r.diverged_genomes;
    j["digest"] = fmt::format("{:016x}", genome_digest(r.best));
    write_file_atomic(dir / "summary.json", j.dump(2) + "\n");

    if (r.best.diverged) {
        fmt::print(out, "every trained genome diverged; outputs in {}\n", dir.string());
        return kNumericalFailure;
    }
    fmt::print(out, "best mse {} mae {} ({} nodes, {} edges, {} rec edges); outputs in {}\n",
               real(*r.best.fitness), real(r.best.mae.value_or(inf)), r.best_counts.nodes, r.best_counts.edges,
               r.best_counts.rec_edges, dir.string());
    return kOk;
}

int cmd_experiment(const ExperimentOpts &o, std::ostream &out) {
    ExperimentPlan plan;
    plan.dataset = to_spec(o.data);
    if (o.strategies.empty()) {
        plan.strategies = all_strategies();
    } else {
        for (const auto &code : o.strategies) plan.strategies.push_back(parse_strategy(code, "strategies"));
    }
    plan.epoch_budgets = o.budgets;
    plan.total_epoch_budget = o.engine.total_bp_epochs;
    plan.repeats = o.repeats;
    plan.base_seed = o.seed;
    plan.search = to_search_config(o.engine);
    plan.parallel_searches = o.parallel_searches;
    ReportOptions report{parse_sides(o.sides), o.alpha};
    plan.validate();

    RepeatRunner hooks;
    hooks.on_cell = [&](const RunRecord &rec, bool resumed) {
        fmt::print(out, "{} {}\n", rec.cell_name(), resumed ? "loaded" : "done");
        out.flush();
    };
    std::filesystem::path dir = o.out_dir;
    auto records = run_plan(plan, dir, hooks);
    auto files = render_reports(records, dir / "reports", report);
    fmt::print(out, "{} cells, {} report files in {}\n", records.size(), files.size(), (dir / "reports").string());

    bool all_diverged = std::all_of(records.begin(), records.end(), [](const RunRecord &r) {
        return std::none_of(r.repeats.begin(), r.repeats.end(),
                            [](const RepeatRecord &x) { return std::isfinite(x.best_mse); });
    });
    return all_diverged ? kNumericalFailure : kOk;
}

int cmd_inspect(const InspectOpts &o, std::ostream &out) {
    Genome g = read_genome_file(o.file);
    GeneCounts c = g.enabled_counts();
    fmt::print(out, "genome {}\n", o.file);
    if (g.fitness)
        fmt::print(out, "fitness mse {} mae {}{}\n", real(*g.fitness), g.mae ? real(*g.mae) : "-",
                   g.diverged ? " (diverged)" : "");
    else
        fmt::print(out, "fitness -{}\n", g.diverged ? " (diverged)" : "");
    fmt::print(out, "inputs {} outputs {}\n", g.input_count(), g.output_count());
    fmt::print(out, "nodes {} edges {} rec_edges {} hidden {}\n", c.nodes, c.edges, c.rec_edges, c.hidden);

    std::map<NodeType, std::size_t> per_type;
    for (const auto &n : g.nodes)
        if (n.enabled && is_hidden(n.type)) ++per_type[n.type];
    fmt::print(out, "hidden types");
    for (NodeType t : kHiddenNodeTypes) fmt::print(out, " {} {}", to_string(t), per_type[t]);
    fmt::print(out, "\n");
    try {
        WeightStats s = weight_stats(g);
        fmt::print(out, "weights mu {} sigma2 {}\n", real(s.mu), real(s.sigma2));
    } catch (const EmptyGenomeError &) {
        fmt::print(out, "weights -\n");
    }

    fmt::print(out, "\n{:>8} {:<7} {:>10} {:>3}  params\n", "node", "type", "depth", "on");
    for (const auto &n : g.nodes) {
        std::string params;
        for (double p : n.params) params += fmt::format(" {:.6g}", p);
        fmt::print(out, "{:>8} {:<7} {:>10.6f} {:>3} {}\n", n.innovation, to_string(n.type), n.depth,
                   n.enabled ? "y" : "n", params);
    }
    fmt::print(out, "\n{:>8} {:>8} {:>8} {:>14} {:>3}\n", "edge", "source", "target", "weight", "on");
    for (const auto &e : g.edges)
        fmt::print(out, "{:>8} {:>8} {:>8} {:>14.6g} {:>3}\n", e.innovation, e.source, e.target, e.weight,
                   e.enabled ? "y" : "n");
    fmt::print(out, "\n{:>8} {:>8} {:>8} {:>5} {:>14} {:>3}\n", "rec_edge", "source", "target", "skip", "weight", "on");
    for (const auto &e : g.rec_edges)
        fmt::print(out, "{:>8} {:>8} {:>8} {:>5} {:>14.6g} {:>3}\n", e.innovation, e.source, e.target, e.time_skip,
                   e.weight, e.enabled ? "y" : "n");
    return kOk;
}

int cmd_synth(const SynthOpts &o, std::ostream &out) {
    auto kind = synth_kind_from_string(o.kind);
    if (!kind) throw ConfigError("kind", fmt::format("unknown generator '{}'", o.kind));
    TimeSeriesSet ts = synth_series(*kind, o.length, o.seed, o.noise);
    std::filesystem::create_directories(o.out_dir);
    auto path = std::filesystem::path(o.out_dir) / fmt::format("{}.csv", o.kind);
    write_csv(path, ts);
    fmt::print(out, "{} rows, columns {}, inputs {}, outputs {} -> {}\n", ts.length(), fmt::join(ts.column_names, ","),
               fmt::join(ts.input_names(), ","), fmt::join(ts.output_names(), ","), path.string());
    return kOk;
}

std::vector<double> read_sample(const std::string &file) {
    std::ifstream in(file);
    if (!in) throw DataError(fmt::format("cannot open {}", file));
    std::vector<double> values;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        try {
            std::size_t used = 0;
            double v = std::stod(line.substr(first), &used);
            if (line.find_first_not_of(" \t\r", first + used) != std::string::npos) throw std::invalid_argument("");
            values.push_back(v);
        } catch (const std::logic_error &) {
            throw DataError(fmt::format("{}:{}: not a number", file, n));
        }
    }
    if (values.empty()) throw DataError(fmt::format("{} holds no values", file));
    return values;
}

int cmd_stats(const StatsOpts &o, std::ostream &out) {
    if (!o.run_dir.empty()) {
        std::vector<RunRecord> records;
        std::vector<std::filesystem::path> cells;
        for (const auto &entry : std::filesystem::directory_iterator(std::filesystem::path(o.run_dir) / "cells"))
            if (entry.path().extension() == ".json") cells.push_back(entry.path());
        std::sort(cells.begin(), cells.end());
        for (const auto &p : cells) {
            std::ifstream in(p, std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            records.push_back(run_record_from_json(ss.str()));
        }
        auto dir = o.out_dir.empty() ? std::filesystem::path(o.run_dir) / "reports" : std::filesystem::path(o.out_dir);
        auto files = render_reports(records, dir, {parse_sides(o.sides), o.alpha});
        fmt::print(out, "{} records, {} report files in {}\n", records.size(), files.size(), dir.string());
        return kOk;
    }
    if (o.files.size() < 2) throw ConfigError("files", "give at least two sample files or --run_dir");
    std::vector<std::pair<std::string, std::vector<double>>> groups;
    for (const auto &f : o.files) groups.emplace_back(std::filesystem::path(f).stem().string(), read_sample(f));
    if (groups.size() == 2) {
        Alternative alt;
        if (o.alternative == "less") alt = Alternative::Less;
        else if (o.alternative == "greater") alt = Alternative::Greater;
        else if (o.alternative == "two_sided") alt = Alternative::TwoSided;
        else throw ConfigError("alternative", fmt::format("expected less, greater or two_sided, got '{}'", o.alternative));
        UTestResult r = mann_whitney(groups[0].second, groups[1].second, alt);
        fmt::print(out, "U {} p {} ({}, {})\n", r.u_statistic, fmt::format("{:.6g}", r.p_value), to_string(r.method),
                   o.alternative);
        return kOk;
    }
    fmt::print(out, "{}", to_text(pairwise_matrix(groups, parse_sides(o.sides), o.alpha)));
    return kOk;
}

bool flag_given(const std::vector<std::string> &args, const std::string &flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string &a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

std::optional<std::string> config_path(const std::vector<std::string> &args) {
    for (std::size_t k = 0; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) return args[k + 1];
        if (args[k].rfind("--config=", 0) == 0) return args[k].substr(9);
    }
    return std::nullopt;
}

bool settable(const CLI::Option *opt) {
    if (opt->get_lnames().empty()) return false;
    const std::string &name = opt->get_lnames().front();
    return name != "help" && name != "config";
}

/// Appends `--key=value` for every EVOFORGE_<KEY> variable whose flag is not on the command line.
void inject_environment(const CLI::App &sub, std::vector<std::string> &args) {
    std::vector<std::string> extra;
    for (const CLI::Option *opt : sub.get_options()) {
        if (!settable(opt)) continue;
        const std::string &name = opt->get_lnames().front();
        const char *value = std::getenv(env_name(name).c_str());
        if (value == nullptr || flag_given(args, "--" + name)) continue;
        extra.push_back(fmt::format("--{}={}", name, value));
    }
    args.insert(args.end(), extra.begin(), extra.end());
}

/// Appends the config file's keys that neither a flag nor the environment set.
/// Keys may sit at top level or in a section named after the command.
void inject_config(const CLI::App &sub, const std::string &file, std::vector<std::string> &args) {
    if (!std::filesystem::is_regular_file(file)) throw CLI::FileError::Missing(file);
    std::vector<CLI::ConfigItem> items = CLI::ConfigTOML().from_file(file);
    std::vector<std::string> extra;
    for (const auto &item : items) {
        if (item.name == "++" || item.name == "--") continue;
        if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents[0] == sub.get_name()))
            throw ConfigError(item.fullname(), "unknown key");
        const CLI::Option *opt = sub.get_option_no_throw("--" + item.name);
        if (opt == nullptr || !settable(opt)) throw ConfigError(item.name, "unknown key");
        const std::string flag = "--" + opt->get_lnames().front();
        if (flag_given(args, flag)) continue;
        std::string value;
        for (const auto &v : item.inputs) value += (value.empty() ? "" : ",") + v;
        extra.push_back(fmt::format("{}={}", flag, value));
    }
    args.insert(args.end(), extra.begin(), extra.end());
}

} // namespace

std::string env_name(const std::string &key) {
    std::string out = "EVOFORGE_";
    for (char c : key) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

int run(const std::vector<std::string> &args_in, std::ostream &out, std::ostream &err) {
    CLI::App app{"Neuroevolution of recurrent networks with weight inheritance strategies", "evoforge"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    SearchOpts search;
    auto *s = app.add_subcommand("search", "run one island search");
    s->add_option("--config", "TOML or INI settings file");
    add_dataset_options(s, search.data);
    add_engine_options(s, search.engine);
    s->add_option("--strategy", search.strategy, "weight strategy code such as X-L-L");
    s->add_option("--bp_epochs", search.bp_epochs, "training epochs per genome");
    s->add_option("--seed", search.seed, "search seed");
    s->add_option("--out-dir,--out_dir", search.out_dir, "output directory");

    ExperimentOpts exp;
    auto *e = app.add_subcommand("experiment", "run a strategy x budget plan and render reports");
    e->add_option("--config", "plan file (TOML or INI)");
    add_dataset_options(e, exp.data);
    add_engine_options(e, exp.engine);
    e->add_option("--strategies", exp.strategies, "strategy codes; default all twelve")->delimiter(',');
    e->add_option("--budgets", exp.budgets, "epochs per genome")->delimiter(',');
    e->add_option("--repeats", exp.repeats);
    e->add_option("--seed", exp.seed, "base seed; repeat k uses seed + k");
    e->add_option("--parallel_searches", exp.parallel_searches, "searches run concurrently");
    e->add_option("--sides", exp.sides, "observed or two_sided U-matrix tests");
    e->add_option("--alpha", exp.alpha, "significance level for U matrices");
    e->add_option("--out-dir,--out_dir", exp.out_dir, "run directory");

    InspectOpts inspect;
    auto *i = app.add_subcommand("inspect", "print a .gnm genome");
    i->add_option("file", inspect.file, ".gnm file")->required();

    SynthOpts synth;
    auto *y = app.add_subcommand("synth", "write a synthetic series as CSV");
    y->add_option("--config", "TOML or INI settings file");
    y->add_option("--kind", synth.kind, "sine_mix, mackey_glass or noisy_ar");
    y->add_option("--length", synth.length);
    y->add_option("--seed", synth.seed);
    y->add_option("--noise", synth.noise);
    y->add_option("--out-dir,--out_dir", synth.out_dir);

    StatsOpts stats;
    auto *t = app.add_subcommand("stats", "Mann-Whitney tests on samples or re-render reports of a run");
    t->add_option("files", stats.files, "one value per line; two files give a single test, more a matrix");
    t->add_option("--alternative", stats.alternative, "less, greater or two_sided (two samples)");
    t->add_option("--sides", stats.sides, "observed or two_sided (matrix)");
    t->add_option("--alpha", stats.alpha);
    t->add_option("--run_dir", stats.run_dir, "experiment directory to re-render");
    t->add_option("--out-dir,--out_dir", stats.out_dir);

    std::vector<std::string> args = args_in;
    try {
        for (const auto &a : args_in) {
            if (a.empty() || a[0] == '-') continue;
            if (auto *sub = app.get_subcommand_no_throw(a)) {
                inject_environment(*sub, args);
                if (auto file = config_path(args_in)) inject_config(*sub, *file, args);
            }
            break;
        }
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &ex) {
        return app.exit(ex, out, err);
    } catch (const CLI::CallForAllHelp &ex) {
        return app.exit(ex, out, err);
    } catch (const CLI::FileError &ex) {
        fmt::print(err, "error: {}\n", ex.what());
        return kInputError;
    } catch (const CLI::ParseError &ex) {
        app.exit(ex, out, err);
        return kConfigError;
    } catch (const ConfigError &ex) {
        fmt::print(err, "config error: {}\n", ex.what());
        return kConfigError;
    }

    try {
        if (s->parsed()) return cmd_search(search, out);
        if (e->parsed()) return cmd_experiment(exp, out);
        if (i->parsed()) return cmd_inspect(inspect, out);
        if (y->parsed()) return cmd_synth(synth, out);
        return cmd_stats(stats, out);
    } catch (const ConfigError &ex) {
        fmt::print(err, "config error: {}\n", ex.what());
        return kConfigError;
    } catch (const DimensionError &ex) {
        fmt::print(err, "config error: {}\n", ex.what());
        return kConfigError;
    } catch (const ParseError &ex) {
        fmt::print(err, "{}: {}\n", inspect.file.empty() ? "input" : inspect.file, ex.what());
        return kInputError;
    } catch (const DataError &ex) {
        fmt::print(err, "input error: {}\n", ex.what());
        return kInputError;
    } catch (const std::filesystem::filesystem_error &ex) {
        fmt::print(err, "input error: {}\n", ex.what());
        return kInputError;
    } catch (const NumericalDivergence &ex) {
        fmt::print(err, "numerical failure: {}\n", ex.what());
        return kNumericalFailure;
    }
}

} // namespace evoforge::cli
