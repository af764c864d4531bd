// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evoforge/genome.hpp"

namespace evoforge {

struct SearchResult;

enum class UTestMethod { Exact, NormalApprox };
enum class Alternative { Less, Greater, TwoSided };

std::string_view to_string(UTestMethod m);

struct UTestResult {
    /// U of the first sample: R_a - n_a (n_a + 1) / 2 with midranks.
    double u_statistic = 0.0;
    double p_value = 1.0;
    UTestMethod method = UTestMethod::Exact;
};

/// Mann-Whitney U test. The default alternative is "a is stochastically
/// smaller than b". Exact when both sizes are at most 12 and the pooled
/// data has no ties, otherwise the tie- and continuity-corrected normal
/// approximation. `method` forces one path; exact with ties is a ConfigError.
/// Throws DimensionError on an empty sample.
UTestResult mann_whitney(std::span<const double> a, std::span<const double> b, Alternative alt = Alternative::Less,
                         std::optional<UTestMethod> method = std::nullopt);

/// Number of size-m subsets of {1..m+n} whose rank-sum U equals k, for k = 0..m*n.
std::vector<std::uint64_t> u_null_counts(std::size_t m, std::size_t n);

struct RepeatOutcome {
    double best_mae = 0.0;
    GeneCounts counts;
};

struct RepeatSummary {
    std::string label;
    int bp_epochs = 0;
    std::vector<double> best_mae_per_repeat;
    double worst_mae = 0.0;
    double avg_mae = 0.0;
    double best_mae = 0.0;
    double avg_nodes = 0.0;
    double avg_edges = 0.0;
    double avg_rec_edges = 0.0;
};

/// Worst/average/best of the per-repeat MAEs and mean best-genome gene counts.
RepeatSummary summarize(std::string label, int bp_epochs, const std::vector<RepeatOutcome> &repeats);
RepeatSummary summarize(std::string label, int bp_epochs, const std::vector<SearchResult> &repeats);

enum class PairwiseSides {
    /// One-sided test in the direction the data lean: min(p_less, p_greater).
    ObservedDirection,
    TwoSided,
};

struct PairwiseEntry {
    /// Empty on the diagonal.
    std::optional<UTestResult> result;
    bool significant = false;
};

struct PairwiseMatrix {
    std::vector<std::string> labels;
    /// entries[i][j] compares group i (as a) against group j (as b).
    std::vector<std::vector<PairwiseEntry>> entries;
    double alpha = 0.05;
};

/// U test for every ordered pair of groups; significant when p <= alpha.
PairwiseMatrix pairwise_matrix(const std::vector<std::pair<std::string, std::vector<double>>> &groups,
                               PairwiseSides sides = PairwiseSides::ObservedDirection, double alpha = 0.05);

/// Label row and column; p-values with "-" on the diagonal and a trailing
/// "*" for significant entries in the text form.
std::string to_csv(const PairwiseMatrix &m);
std::string to_text(const PairwiseMatrix &m);

} // namespace evoforge
