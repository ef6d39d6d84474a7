#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmforecast/series.hpp"
#include "lmforecast/session.hpp"

namespace lmforecast {

// ============================================================================
// Display formatting
// ============================================================================

/// Fixed-point rendering with round-half-away-from-zero ties.
std::string format_fixed(double value, int decimals);

/// Efficiency display rule: n_total / t_train truncated (not rounded) to two
/// decimals, computed in integer arithmetic so the cut is exact.
std::string efficiency_display(std::size_t n_total, std::size_t t_train);

// ============================================================================
// Run configuration
// ============================================================================

/// Named split-scenario presets exposed by the CLI.
const std::vector<SplitSpec>& preset_table4(); ///< 7 scenarios, 90/5/5 .. 30/35/35
const std::vector<SplitSpec>& preset_table7(); ///< 70/15/15 and 30/35/35
std::optional<std::vector<SplitSpec>> preset_by_name(const std::string& name);

/// Parse "train/validation/test". Accepts fractions ("0.7/0.15/0.15") or
/// percentages ("70/15/15"); percentages are detected by their sum and scaled
/// down. Throws ConfigError on malformed text.
SplitSpec parse_split_text(const std::string& text);

/// Everything one CLI invocation needs. Sources are exclusive: either a CSV
/// input path or synthetic-generator parameters.
struct RunConfig {
    std::optional<std::filesystem::path> input_path;
    std::string column = "hr_bpm";
    std::optional<SynthParams> synth;

    NarLayout layout;
    LmConfig lm;
    int max_fail = 6;
    std::uint64_t seed = 1;

    std::vector<SplitSpec> scenarios;
    std::filesystem::path out_dir = "out";
    bool emit_plots = false;
    bool parallel = false;

    /// Throws ConfigError unless exactly one data source is set and at least
    /// one scenario is requested.
    void validate() const;
};

/// Parse the JSON config-file schema documented in the README. Unknown keys
/// are rejected. Throws FileNotFound or ConfigError.
RunConfig load_run_config(const std::filesystem::path& json_path);

/// Resolve the configured data source to a series (CSV load or synthesis).
SeriesData load_input_series(const RunConfig& config);

// ============================================================================
// Report emission (deterministic: identical outcomes yield identical bytes)
// ============================================================================

void write_scenarios_csv(const std::filesystem::path& path,
                         std::span<const ScenarioOutcome> outcomes);
void write_scenarios_json(const std::filesystem::path& path, const RunConfig& config,
                          const SeriesData& series, std::span<const ScenarioOutcome> outcomes);
void write_plots(const std::filesystem::path& plot_dir, std::span<const ScenarioOutcome> outcomes);

// ============================================================================
// CLI entry points (return process exit codes)
// ============================================================================

/// `synth`: generate a CSV with columns t_s, hr_bpm.
int cmd_synth(const SynthParams& params, const std::filesystem::path& out_csv);

/// `run`: single-scenario session; writes out/report.json, out/report.csv and,
/// when requested, out/plots/.
int cmd_run(const RunConfig& config);

/// `scenarios`: sweep; writes out/scenarios.csv, out/scenarios.json and, when
/// requested, out/plots/. Exit code 0 iff every scenario completed.
int cmd_scenarios(const RunConfig& config);

} // namespace lmforecast
