#include "lmforecast/series.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "lmforecast/rng.hpp"

namespace lmforecast {

namespace {

std::string trim(std::string_view text) {
    std::size_t first = 0;
    std::size_t last = text.size();
    while (first < last && std::isspace(static_cast<unsigned char>(text[first]))) ++first;
    while (last > first && std::isspace(static_cast<unsigned char>(text[last - 1]))) --last;
    return std::string(text.substr(first, last - first));
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        fields.push_back(trim(std::string_view(line).substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

std::optional<double> parse_number(const std::string& cell) {
    if (cell.empty()) {
        return std::nullopt;
    }
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    if (*begin == '+') ++begin; // from_chars rejects an explicit plus
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        return std::nullopt;
    }
    return value;
}

std::string strip_bom(std::string line) {
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
        static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
        line.erase(0, 3);
    }
    return line;
}

} // namespace

// ============================================================================
// ColumnRef
// ============================================================================

ColumnRef ColumnRef::by_name(std::string column_name) {
    ColumnRef ref;
    ref.name = std::move(column_name);
    return ref;
}

ColumnRef ColumnRef::by_index(std::size_t column_index) {
    ColumnRef ref;
    ref.index = column_index;
    return ref;
}

ColumnRef ColumnRef::parse(const std::string& text) {
    if (!text.empty() &&
        std::all_of(text.begin(), text.end(),
                    [](unsigned char c) { return std::isdigit(c) != 0; })) {
        return by_index(static_cast<std::size_t>(std::stoull(text)));
    }
    return by_name(text);
}

std::string ColumnRef::describe() const {
    return is_name() ? "column '" + *name + "'" : "column #" + std::to_string(index);
}

// ============================================================================
// load_csv
// ============================================================================

SeriesData load_csv(const std::filesystem::path& path, const ColumnRef& column, NanPolicy policy,
                    std::size_t min_rows) {
    (void)policy; // DropRow is the only policy
    std::ifstream file(path);
    if (!file) {
        throw FileNotFound("cannot open '" + path.string() + "'");
    }

    std::string line;
    bool first_line = true;
    bool resolved = false;
    std::size_t column_index = column.index;

    SeriesData series;
    series.source_label = path.filename().string() + ":" + column.describe();

    while (std::getline(file, line)) {
        if (first_line) {
            line = strip_bom(std::move(line));
        }
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        const std::vector<std::string> fields = split_fields(line);

        if (!resolved) {
            // The first non-empty row decides whether a header exists: it is a
            // header iff the selected column's cell there is non-numeric.
            if (column.is_name()) {
                auto it = std::find(fields.begin(), fields.end(), *column.name);
                if (it == fields.end()) {
                    throw ColumnNotFound("no header field named '" + *column.name + "' in '" +
                                         path.string() + "'");
                }
                column_index = static_cast<std::size_t>(it - fields.begin());
                resolved = true;
                first_line = false;
                continue; // header row consumed
            }
            if (column_index >= fields.size()) {
                throw ColumnNotFound(column.describe() + " out of range; first row of '" +
                                     path.string() + "' has " + std::to_string(fields.size()) +
                                     " fields");
            }
            resolved = true;
            if (!parse_number(fields[column_index]).has_value()) {
                first_line = false;
                continue; // non-numeric first cell = header row
            }
        }
        first_line = false;

        if (column_index >= fields.size()) {
            continue; // short row: selected cell missing, drop
        }
        const std::optional<double> value = parse_number(fields[column_index]);
        if (!value || !std::isfinite(*value) || *value <= 0.0) {
            continue;
        }
        series.values.push_back(*value);
    }

    if (!resolved && column.is_name()) {
        throw ColumnNotFound("no header field named '" + *column.name + "' in empty file '" +
                             path.string() + "'");
    }
    if (series.values.size() < min_rows) {
        throw EmptySeries("'" + path.string() + "' yields " +
                          std::to_string(series.values.size()) + " usable rows, need at least " +
                          std::to_string(min_rows));
    }
    return series;
}

// ============================================================================
// synth_heart_rate
// ============================================================================

SeriesData synth_heart_rate(const SynthParams& params) {
    if (params.n < 10) {
        throw ConfigError("synthetic series needs n >= 10");
    }
    if (!(params.base_bpm > 0.0)) {
        throw ConfigError("base_bpm must be positive");
    }
    if (!(params.modulation_period_s > 0.0)) {
        throw ConfigError("modulation_period_s must be positive");
    }
    if (params.modulation_amp < 0.0 || params.noise_std < 0.0) {
        throw ConfigError("modulation_amp and noise_std must be non-negative");
    }

    SplitMix64 rng(params.seed);
    SeriesData series;
    series.timestamps.reserve(params.n);
    series.values.reserve(params.n);
    {
        std::ostringstream label;
        label << "synth:seed=" << params.seed << ",n=" << params.n << ",base=" << params.base_bpm
              << ",drift=" << params.drift_bpm_per_ks << ",amp=" << params.modulation_amp
              << ",period=" << params.modulation_period_s << ",noise=" << params.noise_std;
        series.source_label = label.str();
    }

    constexpr double two_pi = 2.0 * std::numbers::pi_v<double>;
    for (std::size_t i = 0; i < params.n; ++i) {
        const double t = static_cast<double>(i); // 1 Hz sampling
        double value = params.base_bpm + params.drift_bpm_per_ks * (t / 1000.0) +
                       params.modulation_amp * std::sin(two_pi * t / params.modulation_period_s) +
                       params.noise_std * rng.next_gaussian();
        value = std::max(value, 20.0); // physiological floor
        series.timestamps.push_back(t);
        series.values.push_back(value);
    }
    return series;
}

// ============================================================================
// embed
// ============================================================================

namespace {

void validate_lags(std::span<const int> lags) {
    if (lags.empty()) {
        throw ConfigError("at least one lag is required");
    }
    int previous = 0;
    for (int lag : lags) {
        if (lag <= previous) {
            throw ConfigError("lags must be strictly increasing positive integers");
        }
        previous = lag;
    }
}

} // namespace

LagEmbedding embed_values(std::span<const double> values, std::span<const int> lags) {
    validate_lags(lags);
    const std::size_t max_lag = static_cast<std::size_t>(lags.back());
    if (values.size() <= max_lag) {
        throw SeriesTooShort("series of length " + std::to_string(values.size()) +
                             " has no complete row for max lag " + std::to_string(max_lag));
    }
    const std::size_t n = values.size() - max_lag;
    LagEmbedding embedding;
    embedding.first_target_index = max_lag;
    embedding.inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(lags.size()));
    embedding.targets.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t target_index = max_lag + i;
        for (std::size_t j = 0; j < lags.size(); ++j) {
            embedding.inputs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                values[target_index - static_cast<std::size_t>(lags[j])];
        }
        embedding.targets(static_cast<Eigen::Index>(i)) = values[target_index];
    }
    return embedding;
}

LagEmbedding embed(const SeriesData& series, std::span<const int> lags) {
    return embed_values(series.values, lags);
}

// ============================================================================
// split_block
// ============================================================================

void SplitSpec::validate() const {
    const double sum = train_fraction + validation_fraction + test_fraction;
    const bool in_range = train_fraction > 0.0 && train_fraction < 1.0 &&
                          validation_fraction > 0.0 && validation_fraction < 1.0 &&
                          test_fraction > 0.0 && test_fraction < 1.0;
    if (!in_range || std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("split fractions must each lie in (0, 1) and sum to 1");
    }
}

SplitIndices split_block(std::size_t n, const SplitSpec& spec) {
    spec.validate();
    // llround implements round-half-away-from-zero, the documented tie rule.
    const long long validation_count = std::llround(spec.validation_fraction * static_cast<double>(n));
    const long long test_count = std::llround(spec.test_fraction * static_cast<double>(n));
    const long long train_count = static_cast<long long>(n) - validation_count - test_count;
    if (train_count < 1 || validation_count < 1 || test_count < 1) {
        throw DegenerateSplit("split of " + std::to_string(n) + " samples leaves counts (" +
                              std::to_string(train_count) + ", " + std::to_string(validation_count) +
                              ", " + std::to_string(test_count) + ")");
    }
    SplitIndices split;
    split.train = {0, static_cast<std::size_t>(train_count)};
    split.validation = {split.train.end, split.train.end + static_cast<std::size_t>(validation_count)};
    split.test = {split.validation.end, split.validation.end + static_cast<std::size_t>(test_count)};
    return split;
}

// ============================================================================
// write_series_csv
// ============================================================================

void write_series_csv(const SeriesData& series, const std::filesystem::path& path) {
    std::ofstream file(path);
    if (!file) {
        throw FileNotFound("cannot write '" + path.string() + "'");
    }
    file << "t_s,hr_bpm\n";
    char buffer[64];
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const double t = series.timestamps.empty() ? static_cast<double>(i) : series.timestamps[i];
        // %.17g round-trips doubles exactly, keeping the file loss-free.
        std::snprintf(buffer, sizeof(buffer), "%.17g,%.17g\n", t, series.values[i]);
        file << buffer;
    }
    if (!file.good()) {
        throw Error("write failed on '" + path.string() + "'");
    }
}

} // namespace lmforecast
