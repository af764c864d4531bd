// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "evoforge/error.hpp"
#include "evoforge/genome.hpp"
#include "evoforge/weights.hpp"
#include "../support/ks.hpp"
#include "../support/random_genome.hpp"

using namespace evoforge;
using fixtures::ks_critical_001;
using fixtures::ks_statistic;

namespace {

constexpr std::size_t kN = 100000;

template <typename F> std::vector<double> draw(F f) {
    std::vector<double> xs(kN);
    for (double &x : xs) x = f();
    return xs;
}

double mean(const std::vector<double> &xs) { return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size(); }

double variance(const std::vector<double> &xs) {
    double m = mean(xs), s = 0.0;
    for (double x : xs) s += (x - m) * (x - m);
    return s / xs.size();
}

} // namespace

TEST(Xavier, ClosedFormBounds) {
    EXPECT_EQ(xavier_bound({3, 3}), 1.0);
    EXPECT_NEAR(xavier_bound({6, 2}), std::sqrt(0.75), 1e-15);
    EXPECT_NEAR(xavier_bound({6, 2}), 0.86603, 1e-5);
}

TEST(Xavier, SamplesInRange) {
    Rng rng = make_rng(1);
    for (int i = 0; i < 1000; ++i) {
        double v = xavier_sample({3, 3}, rng);
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Xavier, DegenerateFans) {
    Rng rng = make_rng(1);
    EXPECT_THROW(xavier_sample({0, 0}, rng), DegenerateFanError);
    EXPECT_NO_THROW(xavier_sample({0, 1}, rng));
}

TEST(Xavier, MonteCarloAndKs) {
    Rng rng = make_rng(11);
    const double b = xavier_bound({4, 4});
    auto xs = draw([&] { return xavier_sample({4, 4}, rng); });
    EXPECT_NEAR(mean(xs), 0.0, 0.01);
    EXPECT_LE(*std::max_element(xs.begin(), xs.end()), b);
    EXPECT_GE(*std::min_element(xs.begin(), xs.end()), -b);
    EXPECT_LT(ks_statistic(xs, [&](double x) { return fixtures::uniform_cdf(x, -b, b); }), ks_critical_001(kN));
}

TEST(Kaiming, ClosedFormScale) {
    EXPECT_EQ(kaiming_scale({2, 0}), std::sqrt(2.0) / 2.0);
    EXPECT_NEAR(kaiming_scale({2, 0}), 0.70711, 1e-5);
    EXPECT_NEAR(kaiming_scale({1, 0}), 1.41421, 1e-5);
    EXPECT_NEAR(kaiming_scale({4, 0}, true), std::sqrt(0.5), 1e-15);
}

TEST(Kaiming, DegenerateFanIn) {
    Rng rng = make_rng(1);
    EXPECT_THROW(kaiming_sample({0, 3}, rng), DegenerateFanError);
}

TEST(Kaiming, MonteCarloAndKs) {
    Rng rng = make_rng(12);
    const double s = std::sqrt(2.0) / 4.0;
    auto xs = draw([&] { return kaiming_sample({4, 1}, rng); });
    EXPECT_NEAR(std::sqrt(variance(xs)), s, 0.02 * s);
    EXPECT_LT(ks_statistic(xs, [&](double x) { return fixtures::normal_cdf(x, 0.0, s); }), ks_critical_001(kN));
}

TEST(Uniform, RangeAndErrors) {
    Rng rng = make_rng(2);
    auto xs = draw([&] { return uniform_sample(-0.5, 0.5, rng); });
    for (double x : xs) ASSERT_TRUE(x >= -0.5 && x <= 0.5);
    EXPECT_NEAR(mean(xs), 0.0, 0.01);
    EXPECT_LT(ks_statistic(xs, [](double x) { return fixtures::uniform_cdf(x, -0.5, 0.5); }), ks_critical_001(kN));
    EXPECT_THROW(uniform_sample(0.0, 0.0, rng), ConfigError);
    EXPECT_THROW(uniform_sample(1.0, 0.0, rng), ConfigError);
}

TEST(CrossoverR, RangeAndMean) {
    Rng rng = make_rng(3);
    auto xs = draw([&] { return crossover_r(rng); });
    for (double x : xs) ASSERT_TRUE(x >= -0.5 && x <= 1.5);
    EXPECT_NEAR(mean(xs), 0.5, 0.01);
    EXPECT_LT(ks_statistic(xs, [](double x) { return fixtures::uniform_cdf(x, -0.5, 1.5); }), ks_critical_001(kN));
}

TEST(Blend, Endpoints) {
    EXPECT_EQ(lamarckian_blend(0.2, 0.4, 0.0), 0.2);
    EXPECT_EQ(lamarckian_blend(0.2, 0.4, 1.0), 0.4);
    EXPECT_NEAR(lamarckian_blend(0.2, 0.4, 1.5), 0.5, 1e-15);
    static_assert(lamarckian_blend(1.0, 3.0, 0.5) == 2.0);
}

TEST(Blend, AffineLine) {
    Rng rng = make_rng(4);
    for (int i = 0; i < 1000; ++i) {
        double a = uniform_sample(-2, 2, rng), b = uniform_sample(-2, 2, rng), r = crossover_r(rng);
        double c = lamarckian_blend(a, b, r);
        EXPECT_NEAR((c - a) - r * (b - a), 0.0, 1e-12);
    }
}

TEST(WeightStats, Examples) {
    std::vector<double> ones{1, 1, 1}, two{0, 2}, four{-1, 0, 1, 2};
    auto s = weight_stats(ones);
    EXPECT_EQ(s.mu, 1.0);
    EXPECT_EQ(s.sigma2, 0.0);
    s = weight_stats(two);
    EXPECT_EQ(s.mu, 1.0);
    EXPECT_EQ(s.sigma2, 1.0);
    s = weight_stats(four);
    EXPECT_EQ(s.mu, 0.5);
    EXPECT_EQ(s.sigma2, 1.25);
    EXPECT_THROW(weight_stats(std::span<const double>{}), EmptyGenomeError);
}

TEST(WeightStats, GenomeIncludesDisabledGenesAndBiases) {
    InnovationCounter c;
    Genome g = seed_genome(2, 1, c);
    g.edges[0].weight = -1.0;
    g.edges[1].weight = 0.0;
    g.edges[1].enabled = false;
    g.nodes.back().params = {2.0};
    g.rec_edges.push_back({c.next_edge(), 3, 3, 1, 1.0, true});
    auto s = weight_stats(g);
    EXPECT_EQ(s.mu, 0.5);
    EXPECT_EQ(s.sigma2, 1.25);
}

TEST(LamarckianMutation, ZeroVarianceIsExact) {
    Rng rng = make_rng(5);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(lamarckian_mutation_sample({1.0, 0.0}, rng), 1.0);
}

TEST(LamarckianMutation, MonteCarloAndKs) {
    Rng rng = make_rng(6);
    auto xs = draw([&] { return lamarckian_mutation_sample({0.0, 1.0}, rng); });
    EXPECT_NEAR(mean(xs), 0.0, 0.01);
    EXPECT_NEAR(variance(xs), 1.0, 0.02);
    EXPECT_LT(ks_statistic(xs, [](double x) { return fixtures::normal_cdf(x, 0.0, 1.0); }), ks_critical_001(kN));
}

TEST(LamarckianMutation, CentralMass) {
    Rng rng = make_rng(7);
    auto xs = draw([&] { return lamarckian_mutation_sample({0.5, 0.04}, rng); });
    double inside = std::count_if(xs.begin(), xs.end(), [](double x) { return x >= 0.1 && x <= 0.9; });
    // P(|Z| <= 2) = 0.9545
    EXPECT_NEAR(inside / kN, 0.9545, 0.005);
    EXPECT_LT(ks_statistic(xs, [](double x) { return fixtures::normal_cdf(x, 0.5, 0.2); }), ks_critical_001(kN));
}

TEST(Strategy, ParseCodes) {
    auto s = WeightStrategy::parse("K-L-L");
    ASSERT_TRUE(s);
    EXPECT_EQ(s->initial, InitialStrategy::Kaiming);
    EXPECT_EQ(s->crossover, InheritStrategy::Lamarckian);
    EXPECT_EQ(s->mutation, InheritStrategy::Lamarckian);
    EXPECT_EQ(s->code(), "K-L-L");
    s = WeightStrategy::parse("R-R-L");
    ASSERT_TRUE(s);
    EXPECT_EQ(s->crossover, InheritStrategy::SameAsInitial);
    EXPECT_EQ(s->code(), "R-R-L");
    for (const char *bad : {"Q-L-L", "L-L-L", "X-K-L", "X-L", "X-L-L-L", "xll", ""})
        EXPECT_FALSE(WeightStrategy::parse(bad).has_value()) << bad;
}

TEST(Fans, CountUsableConnections) {
    InnovationCounter c;
    Genome g = seed_genome(2, 1, c);
    Innovation out = g.output_ids().front();
    EXPECT_EQ(fan_counts(g, out).fan_in, 2);
    EXPECT_EQ(fan_counts(g, out).fan_out, 0);
    g.rec_edges.push_back({c.next_edge(), out, out, 2, 0.0, true});
    EXPECT_EQ(fan_counts(g, out).fan_in, 3);
    EXPECT_EQ(fan_counts(g, out).fan_out, 1);
    g.edges[0].enabled = false;
    EXPECT_EQ(fan_counts(g, out).fan_in, 2);
    EXPECT_EQ(fan_counts(g, g.input_ids().front()).fan_out, 0);
}

TEST(Initialize, XavierOnSeed) {
    InnovationCounter c;
    Genome g = seed_genome(2, 1, c);
    Rng rng = make_rng(9);
    Genome w = initialize_genome_weights(g, InitialStrategy::Xavier, {}, rng);
    const double b = std::sqrt(6.0) / std::sqrt(2.0);
    for (const auto &e : w.edges) EXPECT_LE(std::abs(e.weight), b);
    EXPECT_NE(w.edges[0].weight, w.edges[1].weight);
}

TEST(Initialize, UniformRangeAndDeterminism) {
    Rng seed_rng = make_rng(10);
    Genome g = fixtures::random_all_types_genome(seed_rng);
    Rng a = make_rng(77), b = make_rng(77);
    Genome wa = initialize_genome_weights(g, InitialStrategy::UniformRandom, {}, a);
    Genome wb = initialize_genome_weights(g, InitialStrategy::UniformRandom, {}, b);
    EXPECT_EQ(wa, wb);
    for (const auto &e : wa.edges) EXPECT_TRUE(e.weight >= -0.5 && e.weight <= 0.5);
    for (const auto &n : wa.nodes)
        for (std::size_t k = 0; k < n.params.size(); ++k) {
            double v = n.params[k];
            if (n.type == NodeType::LSTM && k == kLstmForgetBiasSlot) v -= 1.0;
            EXPECT_TRUE(v >= -0.5 && v <= 0.5);
        }
}

TEST(Initialize, ForgetBiasOffset) {
    NodeGene n{1, NodeType::LSTM, 0.5, true, {}};
    Rng rng = make_rng(1);
    initialize_node_params(n, {1, 1}, InitialStrategy::UniformRandom, {-0.5, 0.5, false, 1.0}, rng);
    ASSERT_EQ(n.params.size(), param_count(NodeType::LSTM));
    EXPECT_GE(n.params[kLstmForgetBiasSlot], 0.5);
    EXPECT_LE(n.params[kLstmForgetBiasSlot], 1.5);
}

TEST(Initialize, IsolatedNodeUsesClampedFans) {
    EXPECT_EQ(clamp_fans(InitialStrategy::Kaiming, {0, 0}).fan_in, 1);
    EXPECT_GE(clamp_fans(InitialStrategy::Xavier, {0, 0}).fan_in + clamp_fans(InitialStrategy::Xavier, {0, 0}).fan_out,
              1);
    EXPECT_EQ(clamp_fans(InitialStrategy::Xavier, {2, 3}).fan_in, 2);
}
