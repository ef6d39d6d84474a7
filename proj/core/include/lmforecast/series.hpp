#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmforecast/errors.hpp"

namespace lmforecast {

// ============================================================================
// Types
// ============================================================================

/// One heart-rate series: positive finite bpm samples, optionally timestamped.
struct SeriesData {
    std::vector<double> timestamps; ///< seconds; empty when the source had none
    std::vector<double> values;     ///< bpm, finite and > 0
    std::string source_label;       ///< provenance string for reports

    std::size_t size() const { return values.size(); }
};

/// Lagged regressor matrix paired with one-step-ahead targets.
///
/// Row i predicts series[first_target_index + i] from the configured lags;
/// inputs(i, j) = series[first_target_index + i - lags[j]].
struct LagEmbedding {
    Eigen::MatrixXd inputs;  ///< N x |lags|
    Eigen::VectorXd targets; ///< N
    std::size_t first_target_index = 0;

    std::size_t rows() const { return static_cast<std::size_t>(targets.size()); }
};

/// Fractions of samples assigned to each contiguous block.
struct SplitSpec {
    double train_fraction = 0.30;
    double validation_fraction = 0.35;
    double test_fraction = 0.35;

    /// Throws ConfigError unless every fraction is in (0, 1) and they sum to 1
    /// within 1e-9.
    void validate() const;
};

/// Half-open [begin, end) range of sample indices.
struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t count() const { return end - begin; }
};

/// Contiguous train -> validation -> test partition of [0, n).
struct SplitIndices {
    IndexRange train;
    IndexRange validation;
    IndexRange test;
};

/// Selects a CSV column either by exact header name or by 0-based position.
struct ColumnRef {
    std::optional<std::string> name;
    std::size_t index = 0;

    static ColumnRef by_name(std::string column_name);
    static ColumnRef by_index(std::size_t column_index);

    /// CLI shorthand: an all-digit string selects by position, anything else
    /// by header name.
    static ColumnRef parse(const std::string& text);

    bool is_name() const { return name.has_value(); }
    std::string describe() const;
};

/// How rows with an unusable selected cell are treated during ingestion.
enum class NanPolicy {
    DropRow, ///< skip rows whose cell is empty, non-numeric, non-finite, or <= 0
};

/// Parameters of the synthetic heart-rate generator.
struct SynthParams {
    std::uint64_t seed = 1;
    std::size_t n = 6312;
    double base_bpm = 75.0;
    double drift_bpm_per_ks = 0.0;   ///< linear drift per 1000 samples
    double modulation_amp = 5.0;     ///< bpm amplitude of the sinusoidal term
    double modulation_period_s = 240.0;
    double noise_std = 1.0;          ///< gaussian noise sigma, bpm
};

// ============================================================================
// Operations
// ============================================================================

/// @brief Load one numeric column from a CSV file.
///
/// The first row is treated as a header iff the selected column's first cell
/// is non-numeric. Rows whose selected cell is empty, non-numeric, non-finite,
/// or <= 0 are dropped. Throws FileNotFound, ColumnNotFound, or EmptySeries
/// (fewer than min_rows usable rows; callers that know the lag structure pass
/// max_lag + 10).
SeriesData load_csv(const std::filesystem::path& path, const ColumnRef& column,
                    NanPolicy policy = NanPolicy::DropRow, std::size_t min_rows = 10);

/// @brief Deterministic synthetic heart-rate series sampled at 1 Hz.
///
/// values[i] = base + drift * (i / 1000) + amp * sin(2*pi*i / period) + noise,
/// with seeded gaussian noise, clamped to >= 20 bpm.
SeriesData synth_heart_rate(const SynthParams& params);

/// @brief Build the lagged regressor matrix for one-step-ahead prediction.
///
/// Lags must be strictly increasing positive integers. Throws SeriesTooShort
/// when no complete row exists.
LagEmbedding embed(const SeriesData& series, std::span<const int> lags);

/// Same as embed() but over a bare value vector (e.g. after normalization).
LagEmbedding embed_values(std::span<const double> values, std::span<const int> lags);

/// @brief Deterministic contiguous block split of n samples.
///
/// validation and test counts round half away from zero; the remainder goes
/// to training. Throws DegenerateSplit when any partition would be empty.
SplitIndices split_block(std::size_t n, const SplitSpec& spec);

/// Writes a two-column CSV (t_s, hr_bpm) round-trippable by load_csv.
void write_series_csv(const SeriesData& series, const std::filesystem::path& path);

} // namespace lmforecast
