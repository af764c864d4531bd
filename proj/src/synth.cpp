// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <numbers>
#include <random>

#include "evoforge/data.hpp"
#include "evoforge/error.hpp"
#include "evoforge/rng.hpp"

namespace evoforge {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

TimeSeriesSet sine_mix(std::size_t length, Rng &rng, double noise) {
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    std::normal_distribution<double> eps(0.0, 1.0);
    const double pa = phase(rng), pb = phase(rng);
    auto a = [&](double t) { return std::sin(kTwoPi * t / 20.0 + pa); };
    auto b = [&](double t) { return std::sin(kTwoPi * t / 10.0 + pb); };
    TimeSeriesSet ts;
    ts.column_names = {"a", "b", "y"};
    ts.values = Matrix(length, 3);
    for (std::size_t i = 0; i < length; ++i) {
        auto t = static_cast<double>(i);
        ts.values(i, 0) = a(t);
        ts.values(i, 1) = b(t);
        ts.values(i, 2) = 0.7 * a(t - 2.0) + 0.3 * b(t - 5.0) + noise * eps(rng);
    }
    ts.input_columns = {0, 1};
    ts.output_columns = {2};
    return ts;
}

TimeSeriesSet mackey_glass(std::size_t length, Rng &rng, double noise) {
    constexpr double beta = 0.2, gamma = 0.1, power = 10.0, dt = 0.1;
    constexpr std::size_t delay = 170;     // tau = 17 in steps of dt
    constexpr std::size_t per_sample = 10; // one sample per unit time
    constexpr std::size_t burn_in = 1000;  // unit times discarded
    std::uniform_real_distribution<double> start(-0.1, 0.1);
    std::normal_distribution<double> eps(0.0, 1.0);

    std::vector<double> hist(delay + 1, 1.2 + start(rng)); // ring of the last tau / dt values
    std::size_t head = 0;
    double x = hist[0];
    auto step = [&] {
        double lagged = hist[(head + 1) % hist.size()];
        x += dt * (beta * lagged / (1.0 + std::pow(lagged, power)) - gamma * x);
        head = (head + 1) % hist.size();
        hist[head] = x;
    };
    for (std::size_t i = 0; i < burn_in * per_sample; ++i) step();

    TimeSeriesSet ts;
    ts.column_names = {"x", "dx"};
    ts.values = Matrix(length, 2);
    double prev = x;
    for (std::size_t i = 0; i < length; ++i) {
        for (std::size_t k = 0; k < per_sample; ++k) step();
        ts.values(i, 0) = x + noise * eps(rng);
        ts.values(i, 1) = x - prev;
        prev = x;
    }
    ts.input_columns = {0, 1};
    ts.output_columns = {0};
    ts.allow_overlap = true;
    return ts;
}

TimeSeriesSet noisy_ar(std::size_t length, Rng &rng, double noise) {
    std::uniform_real_distribution<double> start(-0.5, 0.5);
    std::normal_distribution<double> eps(0.0, 1.0);
    TimeSeriesSet ts;
    ts.column_names = {"u", "y"};
    ts.values = Matrix(length, 2);
    for (std::size_t t = 0; t < length; ++t) {
        double u = std::sin(kTwoPi * static_cast<double>(t) / 30.0);
        ts.values(t, 0) = u;
        if (t < 4) {
            ts.values(t, 1) = start(rng);
            continue;
        }
        ts.values(t, 1) = 0.6 * ts.values(t - 1, 1) - 0.2 * ts.values(t - 4, 1) + 0.5 * ts.values(t - 2, 0) +
                          noise * eps(rng);
    }
    ts.input_columns = {0, 1};
    ts.output_columns = {1};
    ts.allow_overlap = true;
    return ts;
}

} // namespace

std::string_view to_string(SynthKind kind) {
    switch (kind) {
    case SynthKind::SineMix: return "sine_mix";
    case SynthKind::MackeyGlass: return "mackey_glass";
    case SynthKind::NoisyAr: return "noisy_ar";
    }
    return "unknown";
}

std::optional<SynthKind> synth_kind_from_string(std::string_view name) {
    for (SynthKind k : {SynthKind::SineMix, SynthKind::MackeyGlass, SynthKind::NoisyAr})
        if (to_string(k) == name) return k;
    return std::nullopt;
}

double default_synth_noise(SynthKind kind) {
    switch (kind) {
    case SynthKind::SineMix: return 0.05;
    case SynthKind::MackeyGlass: return 0.0;
    case SynthKind::NoisyAr: return 0.1;
    }
    return 0.0;
}

TimeSeriesSet synth_series(SynthKind kind, std::size_t length, std::uint64_t seed, std::optional<double> noise) {
    if (length < 64) throw DimensionError("length: synthetic series need at least 64 rows");
    double sigma = noise.value_or(default_synth_noise(kind));
    if (!(sigma >= 0.0)) throw ConfigError("noise", "must be non-negative");
    Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(kind)));
    switch (kind) {
    case SynthKind::SineMix: return sine_mix(length, rng, sigma);
    case SynthKind::MackeyGlass: return mackey_glass(length, rng, sigma);
    case SynthKind::NoisyAr: return noisy_ar(length, rng, sigma);
    }
    return {};
}

} // namespace evoforge
