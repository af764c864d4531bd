// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "evoforge/error.hpp"
#include "evoforge/rng.hpp"
#include "evoforge/stats.hpp"
#include "../support/mw_oracle.hpp"

using namespace evoforge;

namespace {

std::vector<double> distinct_sample(std::size_t n, std::vector<double> &pool, Rng &rng) {
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t k = pick_index(rng, pool.size());
        out.push_back(pool[k]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
    }
    return out;
}

std::vector<double> shuffled_range(std::size_t n, Rng &rng) {
    std::vector<double> pool(n);
    std::iota(pool.begin(), pool.end(), 1.0);
    std::shuffle(pool.begin(), pool.end(), rng);
    return pool;
}

} // namespace

TEST(MannWhitney, OneTwoThreeVersusFourFiveSix) {
    std::vector<double> a{1, 2, 3}, b{4, 5, 6};
    UTestResult r = mann_whitney(a, b);
    EXPECT_EQ(r.u_statistic, 0.0);
    EXPECT_EQ(r.method, UTestMethod::Exact);
    EXPECT_EQ(r.p_value, 1.0 / 20.0);
    EXPECT_EQ(fixtures::exact_p_less(a, b), 0.05);
    EXPECT_EQ(mann_whitney(a, b, Alternative::Greater).p_value, 1.0);
    EXPECT_EQ(mann_whitney(a, b, Alternative::TwoSided).p_value, 0.1);
}

TEST(MannWhitney, NullCountsMatchEnumeration) {
    for (std::size_t m = 1; m <= 7; ++m)
        for (std::size_t n = 1; n <= 7; ++n) EXPECT_EQ(u_null_counts(m, n), fixtures::enumerate_u_counts(m, n));
    auto c = u_null_counts(3, 3);
    EXPECT_EQ(std::accumulate(c.begin(), c.end(), std::uint64_t{0}), 20u);
}

TEST(MannWhitney, ExactMatchesOracleUpToEight) {
    Rng rng = make_rng(10);
    for (std::size_t m = 1; m <= 8; ++m)
        for (std::size_t n = 1; n <= 8; ++n)
            for (int rep = 0; rep < 4; ++rep) {
                std::vector<double> pool = shuffled_range(m + n, rng);
                auto a = distinct_sample(m, pool, rng);
                auto b = pool;
                UTestResult r = mann_whitney(a, b);
                ASSERT_EQ(r.method, UTestMethod::Exact);
                EXPECT_EQ(r.p_value, fixtures::exact_p_less(a, b)) << m << "x" << n;
                EXPECT_EQ(mann_whitney(a, b, Alternative::Greater).p_value, fixtures::exact_p_less(b, a));
            }
}

TEST(MannWhitney, IdenticalSamples) {
    std::vector<double> a{0.3, 0.1, 0.7, 0.2};
    UTestResult r = mann_whitney(a, a);
    EXPECT_EQ(r.method, UTestMethod::NormalApprox);
    EXPECT_GE(r.p_value, 0.5);
    EXPECT_EQ(r.u_statistic, 8.0);
}

TEST(MannWhitney, NormalApproxCloseToExact) {
    Rng rng = make_rng(11);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> pool = shuffled_range(20, rng);
        auto a = distinct_sample(10, pool, rng);
        double exact = mann_whitney(a, pool, Alternative::Less, UTestMethod::Exact).p_value;
        double approx = mann_whitney(a, pool, Alternative::Less, UTestMethod::NormalApprox).p_value;
        worst = std::max(worst, std::abs(exact - approx));
    }
    EXPECT_LT(worst, 0.01);
}

TEST(MannWhitney, ApproxAgreesForBalancedSizes) {
    Rng rng = make_rng(12);
    for (std::size_t m = 5; m <= 12; ++m)
        for (int rep = 0; rep < 20; ++rep) {
            std::vector<double> pool = shuffled_range(2 * m, rng);
            auto a = distinct_sample(m, pool, rng);
            double exact = mann_whitney(a, pool, Alternative::Less, UTestMethod::Exact).p_value;
            double approx = mann_whitney(a, pool, Alternative::Less, UTestMethod::NormalApprox).p_value;
            EXPECT_NEAR(exact, approx, 0.01) << "size " << m;
        }
}

TEST(MannWhitney, UPlusUPrime) {
    Rng rng = make_rng(13);
    std::normal_distribution<double> d(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> a(3 + rep % 9), b(2 + rep % 13);
        for (double &v : a) v = std::round(d(rng) * 3.0);
        for (double &v : b) v = std::round(d(rng) * 3.0);
        double u = mann_whitney(a, b).u_statistic;
        double u_prime = mann_whitney(b, a).u_statistic;
        EXPECT_DOUBLE_EQ(u + u_prime, static_cast<double>(a.size() * b.size()));
    }
}

TEST(MannWhitney, MonotoneTransformInvariance) {
    Rng rng = make_rng(14);
    std::normal_distribution<double> d(0.0, 1.0);
    for (std::size_t n : {5u, 15u}) {
        std::vector<double> a(n), b(n + 2);
        for (double &v : a) v = d(rng);
        for (double &v : b) v = d(rng) + 0.5;
        auto ta = a, tb = b;
        for (double &v : ta) v = std::exp(3.0 * v) - 7.0;
        for (double &v : tb) v = std::exp(3.0 * v) - 7.0;
        EXPECT_EQ(mann_whitney(a, b).p_value, mann_whitney(ta, tb).p_value);
        EXPECT_EQ(mann_whitney(a, b).u_statistic, mann_whitney(ta, tb).u_statistic);
    }
}

TEST(MannWhitney, TiesUseMidranksAndApprox) {
    std::vector<double> a{1, 2, 2}, b{2, 3, 4};
    UTestResult r = mann_whitney(a, b);
    EXPECT_EQ(r.method, UTestMethod::NormalApprox);
    // ranks 1, 3, 3 for a
    EXPECT_EQ(r.u_statistic, 1.0);
    // tie-corrected variance 9/12 * (7 - 24/30) = 4.65
    double z = (1.0 - 4.5 + 0.5) / std::sqrt(4.65);
    EXPECT_NEAR(r.p_value, 0.5 * std::erfc(-z / std::sqrt(2.0)), 1e-15);
    EXPECT_THROW(mann_whitney(a, b, Alternative::Less, UTestMethod::Exact), ConfigError);
}

TEST(MannWhitney, LargeSamplesUseApprox) {
    std::vector<double> a(13), b(13);
    std::iota(a.begin(), a.end(), 0.0);
    std::iota(b.begin(), b.end(), 100.0);
    UTestResult r = mann_whitney(a, b);
    EXPECT_EQ(r.method, UTestMethod::NormalApprox);
    EXPECT_LT(r.p_value, 1e-4);
}

TEST(MannWhitney, EmptySample) {
    std::vector<double> a{1.0}, none;
    EXPECT_THROW(mann_whitney(a, none), DimensionError);
    EXPECT_THROW(mann_whitney(none, a), DimensionError);
}

TEST(Summarize, Examples) {
    RepeatSummary one = summarize("X-L-L", 10, std::vector<RepeatOutcome>{{0.4, {5, 6, 1, 2}}});
    EXPECT_EQ(one.worst_mae, 0.4);
    EXPECT_EQ(one.avg_mae, 0.4);
    EXPECT_EQ(one.best_mae, 0.4);

    RepeatSummary three = summarize("K-K-K", 5, std::vector<RepeatOutcome>{{1, {}}, {2, {}}, {3, {}}});
    EXPECT_EQ(three.worst_mae, 3.0);
    EXPECT_EQ(three.avg_mae, 2.0);
    EXPECT_EQ(three.best_mae, 1.0);
    EXPECT_EQ(three.best_mae_per_repeat, (std::vector<double>{1, 2, 3}));

    RepeatSummary counts = summarize("R-L-R", 1, std::vector<RepeatOutcome>{{1, {10, 4, 3, 0}}, {1, {20, 8, 6, 0}}});
    EXPECT_EQ(counts.avg_nodes, 15.0);
    EXPECT_EQ(counts.avg_edges, 6.0);
    EXPECT_EQ(counts.avg_rec_edges, 4.5);
    EXPECT_EQ(counts.label, "R-L-R");
    EXPECT_EQ(counts.bp_epochs, 1);

    EXPECT_THROW(summarize("X-X-X", 1, std::vector<RepeatOutcome>{}), DimensionError);
}

TEST(Pairwise, IdenticalGroupsNotSignificant) {
    std::vector<double> s{0.1, 0.5, 0.3, 0.9};
    PairwiseMatrix m = pairwise_matrix({{"A", s}, {"B", s}});
    EXPECT_FALSE(m.entries[0][0].result.has_value());
    ASSERT_TRUE(m.entries[0][1].result.has_value());
    EXPECT_GE(m.entries[0][1].result->p_value, 0.5);
    EXPECT_FALSE(m.entries[0][1].significant);
    EXPECT_FALSE(m.entries[1][0].significant);
}

TEST(Pairwise, SeparatedGroupsSignificant) {
    PairwiseMatrix m = pairwise_matrix({{"A", {1, 2, 3}}, {"B", {100, 101, 102}}});
    EXPECT_EQ(m.entries[0][1].result->p_value, 0.05);
    EXPECT_TRUE(m.entries[0][1].significant);
    EXPECT_TRUE(m.entries[1][0].significant);

    PairwiseMatrix two = pairwise_matrix({{"A", {1, 2, 3}}, {"B", {100, 101, 102}}}, PairwiseSides::TwoSided);
    EXPECT_EQ(two.entries[0][1].result->p_value, 0.1);
    EXPECT_FALSE(two.entries[0][1].significant);
}

TEST(Pairwise, CompleteMatrix) {
    std::vector<std::pair<std::string, std::vector<double>>> groups;
    for (int g = 0; g < 4; ++g) groups.push_back({std::string(1, static_cast<char>('A' + g)), {g + 0.1, g + 0.5, g + 2.2}});
    PairwiseMatrix m = pairwise_matrix(groups);
    std::size_t off = 0;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) {
            EXPECT_EQ(m.entries[i][j].result.has_value(), i != j);
            off += m.entries[i][j].result.has_value();
        }
    EXPECT_EQ(off, 12u);
    EXPECT_THROW(pairwise_matrix({groups[0]}), DimensionError);
}

TEST(Pairwise, Rendering) {
    PairwiseMatrix m = pairwise_matrix({{"X-L-L", {1, 2, 3}}, {"X-X-X", {4, 5, 6}}});
    EXPECT_EQ(to_csv(m), "group,X-L-L,X-X-X\nX-L-L,-,0.05\nX-X-X,0.05,-\n");
    std::string text = to_text(m);
    EXPECT_NE(text.find("0.05*"), std::string::npos);
    EXPECT_NE(text.find("* p <= 0.05"), std::string::npos);
}
