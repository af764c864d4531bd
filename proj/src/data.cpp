// SPDX-License-Identifier: Apache-2.0
#include "evoforge/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "evoforge/error.hpp"

namespace evoforge {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty() || !std::isfinite(v)) return std::nullopt;
    return v;
}

TimeSeriesSet select_columns(const TimeSeriesSet &ts, const std::vector<std::string> &keep) {
    TimeSeriesSet out;
    out.allow_overlap = ts.allow_overlap;
    out.column_names = keep;
    out.values = Matrix(ts.length(), keep.size());
    std::vector<std::size_t> src;
    for (const auto &name : keep) src.push_back(*ts.column_index(name));
    for (std::size_t r = 0; r < ts.length(); ++r)
        for (std::size_t c = 0; c < keep.size(); ++c) out.values(r, c) = ts.values(r, src[c]);
    auto remap = [&](const std::vector<std::size_t> &cols) {
        std::vector<std::size_t> mapped;
        for (std::size_t c : cols)
            if (auto k = out.column_index(ts.column_names[c])) mapped.push_back(*k);
        return mapped;
    };
    out.input_columns = remap(ts.input_columns);
    out.output_columns = remap(ts.output_columns);
    return out;
}

} // namespace

std::optional<std::size_t> TimeSeriesSet::column_index(std::string_view name) const {
    auto it = std::find(column_names.begin(), column_names.end(), name);
    if (it == column_names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - column_names.begin());
}

std::vector<std::string> TimeSeriesSet::input_names() const {
    std::vector<std::string> out;
    for (std::size_t c : input_columns) out.push_back(column_names[c]);
    return out;
}

std::vector<std::string> TimeSeriesSet::output_names() const {
    std::vector<std::string> out;
    for (std::size_t c : output_columns) out.push_back(column_names[c]);
    return out;
}

void TimeSeriesSet::validate() const {
    if (values.cols() != column_names.size()) throw DataError("column name count does not match the matrix");
    for (std::size_t c : input_columns)
        if (c >= column_names.size()) throw DataError("input column index out of range");
    for (std::size_t c : output_columns)
        if (c >= column_names.size()) throw DataError("output column index out of range");
    if (!allow_overlap)
        for (std::size_t c : input_columns)
            if (std::find(output_columns.begin(), output_columns.end(), c) != output_columns.end())
                throw DataError(fmt::format("column '{}' is both input and output", column_names[c]));
    for (std::size_t r = 0; r < values.rows(); ++r)
        for (std::size_t c = 0; c < values.cols(); ++c)
            if (!std::isfinite(values(r, c)))
                throw DataError(fmt::format("non-finite value in column '{}' at row {}", column_names[c], r));
}

TimeSeriesSet parse_csv(std::istream &in, const CsvSchema &schema, std::string_view source) {
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (!have_header && std::getline(in, line)) {
        ++line_no;
        have_header = !trim(line).empty();
    }
    if (!have_header) throw DataError(fmt::format("{}: empty file", source));

    std::vector<std::string> header;
    for (auto f : split_fields(line)) header.emplace_back(f);

    std::vector<std::string> wanted;
    for (const auto &n : schema.inputs)
        if (std::find(wanted.begin(), wanted.end(), n) == wanted.end()) wanted.push_back(n);
    for (const auto &n : schema.outputs)
        if (std::find(wanted.begin(), wanted.end(), n) == wanted.end()) wanted.push_back(n);
    std::vector<std::string> missing;
    std::vector<std::size_t> src;
    for (const auto &n : wanted) {
        auto it = std::find(header.begin(), header.end(), n);
        if (it == header.end()) missing.push_back(n);
        else src.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    if (!missing.empty())
        throw SchemaError(fmt::format("{}: missing column(s) {}", source, fmt::join(missing, ", ")));
    if (wanted.empty()) throw SchemaError(fmt::format("{}: no columns selected", source));

    std::vector<double> values;
    std::vector<std::size_t> bad;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_fields(line);
        bool ok = fields.size() == header.size();
        std::vector<double> row;
        for (std::size_t k = 0; ok && k < src.size(); ++k) {
            auto v = parse_number(fields[src[k]]);
            if (!v) ok = false;
            else row.push_back(*v);
        }
        if (!ok) {
            bad.push_back(line_no);
            continue;
        }
        values.insert(values.end(), row.begin(), row.end());
        ++rows;
    }
    if (!bad.empty()) {
        std::vector<std::size_t> shown(bad.begin(), bad.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(bad.size(), 20)));
        throw DataError(fmt::format("{}: {} unparseable row(s) at line(s) {}{}", source, bad.size(),
                                    fmt::join(shown, ", "), bad.size() > shown.size() ? ", ..." : ""));
    }
    if (rows == 0) throw DataError(fmt::format("{}: no data rows", source));

    TimeSeriesSet ts;
    ts.column_names = wanted;
    ts.values = Matrix(rows, wanted.size());
    std::copy(values.begin(), values.end(), ts.values.data().begin());
    ts.allow_overlap = schema.allow_overlap;
    for (const auto &n : schema.inputs) ts.input_columns.push_back(*ts.column_index(n));
    for (const auto &n : schema.outputs) ts.output_columns.push_back(*ts.column_index(n));
    ts.validate();
    return ts;
}

TimeSeriesSet load_csv(const std::filesystem::path &path, const CsvSchema &schema) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open {}", path.string()));
    return parse_csv(in, schema, path.string());
}

void write_csv(const std::filesystem::path &path, const TimeSeriesSet &ts) {
    std::ofstream out(path);
    if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
    out << fmt::format("{}\n", fmt::join(ts.column_names, ","));
    for (std::size_t r = 0; r < ts.length(); ++r) out << fmt::format("{}\n", fmt::join(ts.values.row(r), ","));
}

NormalizationParams fit_normalization(const TimeSeriesSet &ts, ConstantColumnPolicy policy) {
    if (ts.length() == 0) throw DataError("cannot normalize an empty series");
    NormalizationParams p;
    for (std::size_t c = 0; c < ts.column_names.size(); ++c) {
        double lo = ts.values(0, c), hi = lo;
        for (std::size_t r = 1; r < ts.length(); ++r) {
            lo = std::min(lo, ts.values(r, c));
            hi = std::max(hi, ts.values(r, c));
        }
        ColumnScale s{ts.column_names[c], lo, hi, false};
        if (!(hi > lo)) {
            switch (policy) {
            case ConstantColumnPolicy::Error:
                throw DegenerateColumnError(fmt::format("column '{}' is constant ({})", s.name, lo));
            case ConstantColumnPolicy::Drop: p.dropped.push_back(s.name); continue;
            case ConstantColumnPolicy::PassThrough: s.pass_through = true; break;
            }
        }
        p.columns.push_back(s);
    }
    return p;
}

namespace {

TimeSeriesSet transform(const TimeSeriesSet &ts, const NormalizationParams &params, bool inverse) {
    std::vector<std::string> keep;
    for (const auto &s : params.columns) {
        if (!ts.column_index(s.name)) throw SchemaError(fmt::format("column '{}' not in series", s.name));
        keep.push_back(s.name);
    }
    TimeSeriesSet out = select_columns(ts, keep);
    if (!ts.output_columns.empty() && out.output_columns.empty())
        throw DegenerateColumnError("every output column was dropped as constant");
    for (std::size_t c = 0; c < keep.size(); ++c) {
        const ColumnScale &s = params.columns[c];
        if (s.pass_through) continue;
        double range = s.max - s.min;
        for (std::size_t r = 0; r < out.length(); ++r) {
            double &v = out.values(r, c);
            v = inverse ? v * range + s.min : (v - s.min) / range;
        }
    }
    return out;
}

} // namespace

TimeSeriesSet apply_normalization(const TimeSeriesSet &ts, const NormalizationParams &params) {
    return transform(ts, params, false);
}

TimeSeriesSet denormalize(const TimeSeriesSet &ts, const NormalizationParams &params) {
    return transform(ts, params, true);
}

std::pair<TimeSeriesSet, NormalizationParams> normalize(const TimeSeriesSet &ts,
                                                         const std::optional<NormalizationParams> &params,
                                                         ConstantColumnPolicy policy) {
    NormalizationParams p = params ? *params : fit_normalization(ts, policy);
    return {apply_normalization(ts, p), p};
}

TrainValSplit split_chronological(const TimeSeriesSet &ts, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split_fraction", "must lie in (0, 1)");
    auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(ts.length()) * fraction));
    if (n_train < 2 || ts.length() - n_train < 2)
        throw DataError(fmt::format("series of length {} is too short to split at {}", ts.length(), fraction));
    TrainValSplit s;
    s.split_fraction = fraction;
    s.train = ts;
    s.train.values = ts.values.slice_rows(0, n_train);
    s.validation = ts;
    s.validation.values = ts.values.slice_rows(n_train, ts.length());
    return s;
}

std::pair<TrainValSplit, NormalizationParams> prepare_split(const TimeSeriesSet &ts, double fraction,
                                                            ConstantColumnPolicy policy) {
    TrainValSplit raw = split_chronological(ts, fraction);
    auto [train, params] = normalize(raw.train, std::nullopt, policy);
    TrainValSplit out;
    out.split_fraction = fraction;
    out.train = std::move(train);
    out.validation = apply_normalization(raw.validation, params);
    return {std::move(out), std::move(params)};
}

Sequence to_sequence(const TimeSeriesSet &ts) {
    if (ts.length() < 2) throw DataError("one-step-ahead pairs need at least two rows");
    if (ts.input_columns.empty() || ts.output_columns.empty())
        throw DataError("series needs at least one input and one output column");
    const std::size_t T = ts.length() - 1;
    Sequence s{Matrix(T, ts.input_columns.size()), Matrix(T, ts.output_columns.size())};
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t k = 0; k < ts.input_columns.size(); ++k) s.inputs(t, k) = ts.values(t, ts.input_columns[k]);
        for (std::size_t k = 0; k < ts.output_columns.size(); ++k)
            s.targets(t, k) = ts.values(t + 1, ts.output_columns[k]);
    }
    return s;
}

TrainingData to_training_data(const TrainValSplit &split) {
    return {to_sequence(split.train), to_sequence(split.validation)};
}

namespace {

std::vector<std::size_t> resolve(const TimeSeriesSet &ts, const std::vector<std::string> &names) {
    std::vector<std::size_t> out;
    for (const auto &n : names) {
        auto c = ts.column_index(n);
        if (!c) throw SchemaError(fmt::format("missing column '{}'", n));
        out.push_back(*c);
    }
    return out;
}

} // namespace

TimeSeriesSet load_dataset(const DatasetSpec &spec) {
    if (!spec.csv_path.empty()) {
        if (spec.inputs.empty()) throw ConfigError("inputs", "a CSV dataset needs input columns");
        if (spec.outputs.empty()) throw ConfigError("outputs", "a CSV dataset needs output columns");
        return load_csv(spec.csv_path, {spec.inputs, spec.outputs, spec.allow_overlap});
    }
    auto kind = synth_kind_from_string(spec.synthetic);
    if (!kind) throw ConfigError("dataset", fmt::format("unknown synthetic series '{}'", spec.synthetic));
    TimeSeriesSet ts = synth_series(*kind, spec.length, spec.seed, spec.noise);
    if (!spec.inputs.empty()) ts.input_columns = resolve(ts, spec.inputs);
    if (!spec.outputs.empty()) ts.output_columns = resolve(ts, spec.outputs);
    if (!spec.inputs.empty() || !spec.outputs.empty()) ts.allow_overlap = spec.allow_overlap;
    ts.validate();
    return ts;
}

TrainingData prepare_training_data(const DatasetSpec &spec) {
    TimeSeriesSet ts = load_dataset(spec);
    auto [split, params] = prepare_split(ts, spec.split_fraction, spec.constant_columns);
    return to_training_data(split);
}

std::optional<ConstantColumnPolicy> constant_policy_from_string(std::string_view name) {
    if (name == "error") return ConstantColumnPolicy::Error;
    if (name == "drop") return ConstantColumnPolicy::Drop;
    if (name == "pass_through") return ConstantColumnPolicy::PassThrough;
    return std::nullopt;
}

} // namespace evoforge
