// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evoforge/matrix.hpp"
#include "evoforge/rnn.hpp"

namespace evoforge {

/// Rows are timesteps. Column indices refer to `column_names`.
struct TimeSeriesSet {
    std::vector<std::string> column_names;
    Matrix values;
    std::vector<std::size_t> input_columns;
    std::vector<std::size_t> output_columns;
    bool allow_overlap = false;

    std::size_t length() const noexcept { return values.rows(); }
    std::optional<std::size_t> column_index(std::string_view name) const;
    std::vector<std::string> input_names() const;
    std::vector<std::string> output_names() const;
    /// Throws DataError on NaN/Inf, bad indices or a forbidden input/output overlap.
    void validate() const;
};

struct CsvSchema {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    bool allow_overlap = false;
};

/// Parses a comma-separated file with a header row and keeps only the schema
/// columns. Unparseable rows are reported together with their line numbers.
TimeSeriesSet load_csv(const std::filesystem::path &path, const CsvSchema &schema);
TimeSeriesSet parse_csv(std::istream &in, const CsvSchema &schema, std::string_view source = "<stream>");

/// Writes every column with a header row; values round-trip exactly.
void write_csv(const std::filesystem::path &path, const TimeSeriesSet &ts);

enum class ConstantColumnPolicy { Error, Drop, PassThrough };

struct ColumnScale {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    bool pass_through = false;
};

struct NormalizationParams {
    std::vector<ColumnScale> columns;
    std::vector<std::string> dropped;
};

/// Per-column min and max of `ts`. Constant columns follow `policy`.
NormalizationParams fit_normalization(const TimeSeriesSet &ts, ConstantColumnPolicy policy = ConstantColumnPolicy::Error);

/// x' = (x - min) / (max - min) with the given parameters; values outside the
/// fitted range map outside [0, 1].
TimeSeriesSet apply_normalization(const TimeSeriesSet &ts, const NormalizationParams &params);
TimeSeriesSet denormalize(const TimeSeriesSet &ts, const NormalizationParams &params);

/// Fits on `ts` unless `params` is given, then applies.
std::pair<TimeSeriesSet, NormalizationParams> normalize(const TimeSeriesSet &ts,
                                                         const std::optional<NormalizationParams> &params = {},
                                                         ConstantColumnPolicy policy = ConstantColumnPolicy::Error);

struct TrainValSplit {
    TimeSeriesSet train;
    TimeSeriesSet validation;
    double split_fraction = 2.0 / 3.0;
};

/// First floor(T * fraction) rows train, the rest validate.
TrainValSplit split_chronological(const TimeSeriesSet &ts, double fraction = 2.0 / 3.0);

/// Splits, fits normalization on the training rows only and applies it to both parts.
std::pair<TrainValSplit, NormalizationParams> prepare_split(const TimeSeriesSet &ts, double fraction = 2.0 / 3.0,
                                                            ConstantColumnPolicy policy = ConstantColumnPolicy::Error);

/// One-step-ahead pairs: inputs at row t, outputs at row t + 1.
Sequence to_sequence(const TimeSeriesSet &ts);
TrainingData to_training_data(const TrainValSplit &split);

enum class SynthKind { SineMix, MackeyGlass, NoisyAr };

std::string_view to_string(SynthKind kind);
std::optional<SynthKind> synth_kind_from_string(std::string_view name);

/// Default observation/innovation noise scale for each generator.
double default_synth_noise(SynthKind kind);

/// Deterministic multivariate series whose output depends on lags beyond 1.
///   sine_mix:     columns a, b, y;  y_t = 0.7 a_{t-2} + 0.3 b_{t-5} + noise
///   mackey_glass: columns x, dx;    delay-17 Mackey-Glass, output x
///   noisy_ar:     columns u, y;     y_t = 0.6 y_{t-1} - 0.2 y_{t-4} + 0.5 u_{t-2} + noise
TimeSeriesSet synth_series(SynthKind kind, std::size_t length, std::uint64_t seed,
                           std::optional<double> noise = std::nullopt);

/// Either a CSV file (when `csv_path` is set) or a named synthetic generator.
struct DatasetSpec {
    std::string synthetic = "mackey_glass";
    std::filesystem::path csv_path;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    bool allow_overlap = false;
    std::size_t length = 2000;
    std::uint64_t seed = 1;
    std::optional<double> noise;
    double split_fraction = 2.0 / 3.0;
    ConstantColumnPolicy constant_columns = ConstantColumnPolicy::Error;
};

/// Loads or generates the series. Synthetic sets may be re-targeted by naming
/// `inputs`/`outputs`. Throws ConfigError for an unknown generator.
TimeSeriesSet load_dataset(const DatasetSpec &spec);

/// load_dataset, chronological split, train-fitted normalization and one-step-ahead pairing.
TrainingData prepare_training_data(const DatasetSpec &spec);

std::optional<ConstantColumnPolicy> constant_policy_from_string(std::string_view name);

} // namespace evoforge
