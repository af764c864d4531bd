// SPDX-License-Identifier: Apache-2.0
#include "evoforge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "evoforge/error.hpp"
#include "evoforge/islands.hpp"

namespace evoforge {

namespace {

constexpr std::size_t kExactLimit = 12;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct Ranked {
    double rank_sum_a = 0.0;
    bool ties = false;
    double tie_term = 0.0; // sum of t^3 - t over tie groups
};

Ranked rank(std::span<const double> a, std::span<const double> b) {
    std::vector<std::pair<double, bool>> pooled;
    pooled.reserve(a.size() + b.size());
    for (double v : a) pooled.emplace_back(v, true);
    for (double v : b) pooled.emplace_back(v, false);
    std::sort(pooled.begin(), pooled.end(), [](auto &x, auto &y) { return x.first < y.first; });
    Ranked r;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        while (j < pooled.size() && pooled[j].first == pooled[i].first) ++j;
        double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        auto t = static_cast<double>(j - i);
        if (j - i > 1) {
            r.ties = true;
            r.tie_term += t * t * t - t;
        }
        for (std::size_t k = i; k < j; ++k)
            if (pooled[k].second) r.rank_sum_a += midrank;
        i = j;
    }
    return r;
}

} // namespace

std::string_view to_string(UTestMethod m) { return m == UTestMethod::Exact ? "exact" : "normal_approx"; }

std::vector<std::uint64_t> u_null_counts(std::size_t m, std::size_t n) {
    // f[i][j] over k: arrangements of i a-items and j b-items with U = k.
    std::vector<std::vector<std::vector<std::uint64_t>>> f(
        m + 1, std::vector<std::vector<std::uint64_t>>(n + 1));
    for (std::size_t i = 0; i <= m; ++i) {
        for (std::size_t j = 0; j <= n; ++j) {
            auto &cur = f[i][j];
            cur.assign(i * j + 1, 0);
            if (i == 0 || j == 0) {
                cur[0] = 1;
                continue;
            }
            // Largest item is an a (it beats all j b-items) or a b.
            const auto &with_a = f[i - 1][j];
            const auto &with_b = f[i][j - 1];
            for (std::size_t k = 0; k < with_a.size(); ++k) cur[k + j] += with_a[k];
            for (std::size_t k = 0; k < with_b.size(); ++k) cur[k] += with_b[k];
        }
    }
    return f[m][n];
}

UTestResult mann_whitney(std::span<const double> a, std::span<const double> b, Alternative alt,
                         std::optional<UTestMethod> method) {
    if (a.empty() || b.empty()) throw DimensionError("Mann-Whitney needs two non-empty samples");
    const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
    Ranked r = rank(a, b);
    UTestResult out;
    out.u_statistic = r.rank_sum_a - n1 * (n1 + 1.0) / 2.0;

    if (method == UTestMethod::Exact && r.ties) throw ConfigError("method", "exact test needs tie-free samples");
    const bool exact = method ? *method == UTestMethod::Exact
                              : !r.ties && a.size() <= kExactLimit && b.size() <= kExactLimit;
    if (exact) {
        out.method = UTestMethod::Exact;
        auto counts = u_null_counts(a.size(), b.size());
        auto u = static_cast<std::size_t>(std::llround(out.u_statistic));
        const std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
        const std::uint64_t le = std::accumulate(counts.begin(), counts.begin() + static_cast<std::ptrdiff_t>(u + 1),
                                                 std::uint64_t{0});
        const std::uint64_t ge = std::accumulate(counts.begin() + static_cast<std::ptrdiff_t>(u), counts.end(),
                                                 std::uint64_t{0});
        const double p_le = static_cast<double>(le) / static_cast<double>(total);
        const double p_ge = static_cast<double>(ge) / static_cast<double>(total);
        switch (alt) {
        case Alternative::Less: out.p_value = p_le; break;
        case Alternative::Greater: out.p_value = p_ge; break;
        case Alternative::TwoSided: out.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge)); break;
        }
        return out;
    }

    out.method = UTestMethod::NormalApprox;
    const double N = n1 + n2;
    const double mean = n1 * n2 / 2.0;
    const double var = n1 * n2 / 12.0 * ((N + 1.0) - r.tie_term / (N * (N - 1.0)));
    if (!(var > 0.0)) {
        out.p_value = 1.0;
        return out;
    }
    const double sd = std::sqrt(var);
    const double p_less = normal_cdf((out.u_statistic - mean + 0.5) / sd);
    const double p_greater = 1.0 - normal_cdf((out.u_statistic - mean - 0.5) / sd);
    switch (alt) {
    case Alternative::Less: out.p_value = p_less; break;
    case Alternative::Greater: out.p_value = p_greater; break;
    case Alternative::TwoSided: out.p_value = std::min(1.0, 2.0 * std::min(p_less, p_greater)); break;
    }
    out.p_value = std::clamp(out.p_value, 0.0, 1.0);
    return out;
}

RepeatSummary summarize(std::string label, int bp_epochs, const std::vector<RepeatOutcome> &repeats) {
    if (repeats.empty()) throw DimensionError("summary needs at least one repeat");
    RepeatSummary s;
    s.label = std::move(label);
    s.bp_epochs = bp_epochs;
    s.worst_mae = repeats.front().best_mae;
    s.best_mae = repeats.front().best_mae;
    for (const auto &r : repeats) {
        s.best_mae_per_repeat.push_back(r.best_mae);
        s.worst_mae = std::max(s.worst_mae, r.best_mae);
        s.best_mae = std::min(s.best_mae, r.best_mae);
        s.avg_mae += r.best_mae;
        s.avg_nodes += static_cast<double>(r.counts.nodes);
        s.avg_edges += static_cast<double>(r.counts.edges);
        s.avg_rec_edges += static_cast<double>(r.counts.rec_edges);
    }
    const auto n = static_cast<double>(repeats.size());
    s.avg_mae /= n;
    s.avg_nodes /= n;
    s.avg_edges /= n;
    s.avg_rec_edges /= n;
    return s;
}

RepeatSummary summarize(std::string label, int bp_epochs, const std::vector<SearchResult> &repeats) {
    std::vector<RepeatOutcome> outcomes;
    for (const auto &r : repeats)
        outcomes.push_back({r.best.mae.value_or(std::numeric_limits<double>::infinity()), r.best_counts});
    return summarize(std::move(label), bp_epochs, outcomes);
}

PairwiseMatrix pairwise_matrix(const std::vector<std::pair<std::string, std::vector<double>>> &groups,
                               PairwiseSides sides, double alpha) {
    if (groups.size() < 2) throw DimensionError("pairwise comparison needs at least two groups");
    PairwiseMatrix m;
    m.alpha = alpha;
    const std::size_t k = groups.size();
    m.entries.assign(k, std::vector<PairwiseEntry>(k));
    for (const auto &g : groups) m.labels.push_back(g.first);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            const auto &a = groups[i].second;
            const auto &b = groups[j].second;
            UTestResult r;
            if (sides == PairwiseSides::TwoSided) {
                r = mann_whitney(a, b, Alternative::TwoSided);
            } else {
                UTestResult less = mann_whitney(a, b, Alternative::Less);
                UTestResult greater = mann_whitney(a, b, Alternative::Greater);
                r = less;
                r.p_value = std::min(less.p_value, greater.p_value);
            }
            m.entries[i][j] = {r, r.p_value <= alpha};
        }
    }
    return m;
}

std::string to_csv(const PairwiseMatrix &m) {
    std::string out = "group";
    for (const auto &l : m.labels) out += "," + l;
    out += "\n";
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        out += m.labels[i];
        for (const auto &e : m.entries[i]) out += e.result ? fmt::format(",{:.6g}", e.result->p_value) : ",-";
        out += "\n";
    }
    return out;
}

std::string to_text(const PairwiseMatrix &m) {
    std::size_t width = 8;
    for (const auto &l : m.labels) width = std::max(width, l.size() + 2);
    std::string out = fmt::format("{:<{}}", "", width);
    for (const auto &l : m.labels) out += fmt::format("{:>{}}", l, width);
    out += "\n";
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
        out += fmt::format("{:<{}}", m.labels[i], width);
        for (const auto &e : m.entries[i]) {
            std::string cell = e.result ? fmt::format("{:.3g}{}", e.result->p_value, e.significant ? "*" : "") : "-";
            out += fmt::format("{:>{}}", cell, width);
        }
        out += "\n";
    }
    out += fmt::format("* p <= {}\n", m.alpha);
    return out;
}

} // namespace evoforge
