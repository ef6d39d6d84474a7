#include "lmforecast/report.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lmforecast/svg.hpp"

namespace lmforecast {

using nlohmann::json;

// ============================================================================
// Display formatting
// ============================================================================

std::string format_fixed(double value, int decimals) {
    if (!std::isfinite(value)) {
        return "nan";
    }
    double scale = 1.0;
    for (int i = 0; i < decimals; ++i) {
        scale *= 10.0;
    }
    // llround ties away from zero, the documented display rule.
    long long scaled = std::llround(value * scale);
    const bool negative = scaled < 0;
    unsigned long long magnitude =
        negative ? -static_cast<unsigned long long>(scaled) : static_cast<unsigned long long>(scaled);
    const unsigned long long unit = static_cast<unsigned long long>(scale);
    std::string digits = std::to_string(magnitude % unit);
    while (static_cast<int>(digits.size()) < decimals) {
        digits.insert(digits.begin(), '0');
    }
    std::string out = negative ? "-" : "";
    out += std::to_string(magnitude / unit);
    if (decimals > 0) {
        out += "." + digits;
    }
    return out;
}

std::string efficiency_display(std::size_t n_total, std::size_t t_train) {
    if (t_train < 1 || t_train > n_total) {
        throw ConfigError("efficiency needs 1 <= t_train <= n_total");
    }
    // Integer truncation of (n*100)/t is exact; no float can cross a boundary.
    const unsigned long long hundredths =
        (static_cast<unsigned long long>(n_total) * 100ULL) / t_train;
    std::string fraction = std::to_string(hundredths % 100ULL);
    if (fraction.size() < 2) {
        fraction.insert(fraction.begin(), '0');
    }
    return std::to_string(hundredths / 100ULL) + "." + fraction;
}

// ============================================================================
// Presets
// ============================================================================

const std::vector<SplitSpec>& preset_table4() {
    static const std::vector<SplitSpec> scenarios = {
        {0.90, 0.05, 0.05}, {0.80, 0.10, 0.10}, {0.70, 0.15, 0.15}, {0.60, 0.20, 0.20},
        {0.50, 0.25, 0.25}, {0.40, 0.30, 0.30}, {0.30, 0.35, 0.35},
    };
    return scenarios;
}

const std::vector<SplitSpec>& preset_table7() {
    static const std::vector<SplitSpec> scenarios = {
        {0.70, 0.15, 0.15},
        {0.30, 0.35, 0.35},
    };
    return scenarios;
}

std::optional<std::vector<SplitSpec>> preset_by_name(const std::string& name) {
    if (name == "table4") {
        return preset_table4();
    }
    if (name == "table7") {
        return preset_table7();
    }
    return std::nullopt;
}

// ============================================================================
// RunConfig
// ============================================================================

void RunConfig::validate() const {
    if (input_path.has_value() == synth.has_value()) {
        throw ConfigError("exactly one data source is required: an input CSV or synth parameters");
    }
    if (scenarios.empty()) {
        throw ConfigError("at least one split scenario is required");
    }
    layout.validate();
    lm.validate();
    for (const SplitSpec& spec : scenarios) {
        spec.validate();
    }
    if (max_fail < 1) {
        throw ConfigError("max_fail must be at least 1");
    }
}

SplitSpec parse_split_text(const std::string& text) {
    SplitSpec spec;
    std::istringstream stream(text);
    char slash1 = 0;
    char slash2 = 0;
    if (!(stream >> spec.train_fraction >> slash1 >> spec.validation_fraction >> slash2 >>
          spec.test_fraction) ||
        slash1 != '/' || slash2 != '/' || !stream.eof()) {
        throw ConfigError("scenario '" + text + "' is not of the form train/validation/test");
    }
    const double sum = spec.train_fraction + spec.validation_fraction + spec.test_fraction;
    if (sum > 1.5) { // percent form: a valid fraction triple sums to 1
        spec.train_fraction /= 100.0;
        spec.validation_fraction /= 100.0;
        spec.test_fraction /= 100.0;
    }
    spec.validate();
    return spec;
}

namespace {

void reject_unknown_keys(const json& object, std::initializer_list<const char*> known,
                         const std::string& where) {
    for (const auto& [key, value] : object.items()) {
        (void)value;
        bool found = false;
        for (const char* candidate : known) {
            if (key == candidate) {
                found = true;
                break;
            }
        }
        if (!found) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

} // namespace

RunConfig load_run_config(const std::filesystem::path& json_path) {
    std::ifstream file(json_path);
    if (!file) {
        throw FileNotFound("cannot open config '" + json_path.string() + "'");
    }
    json root;
    try {
        root = json::parse(file);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + json_path.string() + "' is not valid JSON: " + e.what());
    }
    if (!root.is_object()) {
        throw ConfigError("config root must be a JSON object");
    }
    reject_unknown_keys(root,
                        {"input", "synth", "layout", "lm", "session", "scenarios", "out_dir",
                         "emit_plots", "parallel"},
                        "config");

    RunConfig config;
    config.scenarios.clear();
    try {
        if (root.contains("input")) {
            const json& input = root["input"];
            reject_unknown_keys(input, {"path", "column"}, "config.input");
            config.input_path = std::filesystem::path(input.at("path").get<std::string>());
            if (input.contains("column")) {
                config.column = input["column"].get<std::string>();
            }
        }
        if (root.contains("synth")) {
            const json& synth = root["synth"];
            reject_unknown_keys(synth,
                                {"seed", "n", "base_bpm", "drift_bpm_per_ks", "modulation_amp",
                                 "modulation_period_s", "noise_std"},
                                "config.synth");
            SynthParams params;
            params.seed = synth.value("seed", params.seed);
            params.n = synth.value("n", params.n);
            params.base_bpm = synth.value("base_bpm", params.base_bpm);
            params.drift_bpm_per_ks = synth.value("drift_bpm_per_ks", params.drift_bpm_per_ks);
            params.modulation_amp = synth.value("modulation_amp", params.modulation_amp);
            params.modulation_period_s =
                synth.value("modulation_period_s", params.modulation_period_s);
            params.noise_std = synth.value("noise_std", params.noise_std);
            config.synth = params;
        }
        if (root.contains("layout")) {
            const json& layout = root["layout"];
            reject_unknown_keys(layout, {"lags", "hidden_units"}, "config.layout");
            if (layout.contains("lags")) {
                config.layout.lags = layout["lags"].get<std::vector<int>>();
            }
            config.layout.hidden_units = layout.value("hidden_units", config.layout.hidden_units);
        }
        if (root.contains("lm")) {
            const json& lm = root["lm"];
            reject_unknown_keys(lm,
                                {"mu_init", "mu_increase", "mu_decrease", "mu_max", "max_epochs",
                                 "gradient_tol", "step_tol"},
                                "config.lm");
            config.lm.mu_init = lm.value("mu_init", config.lm.mu_init);
            config.lm.mu_increase = lm.value("mu_increase", config.lm.mu_increase);
            config.lm.mu_decrease = lm.value("mu_decrease", config.lm.mu_decrease);
            config.lm.mu_max = lm.value("mu_max", config.lm.mu_max);
            config.lm.max_epochs = lm.value("max_epochs", config.lm.max_epochs);
            config.lm.gradient_tol = lm.value("gradient_tol", config.lm.gradient_tol);
            config.lm.step_tol = lm.value("step_tol", config.lm.step_tol);
        }
        if (root.contains("session")) {
            const json& session = root["session"];
            reject_unknown_keys(session, {"max_fail", "seed"}, "config.session");
            config.max_fail = session.value("max_fail", config.max_fail);
            config.seed = session.value("seed", config.seed);
        }
        if (root.contains("scenarios")) {
            for (const json& entry : root["scenarios"]) {
                if (entry.is_string()) {
                    const std::string text = entry.get<std::string>();
                    if (auto preset = preset_by_name(text)) {
                        config.scenarios.insert(config.scenarios.end(), preset->begin(),
                                                preset->end());
                    } else {
                        config.scenarios.push_back(parse_split_text(text));
                    }
                } else if (entry.is_array() && entry.size() == 3) {
                    config.scenarios.push_back(
                        {entry[0].get<double>(), entry[1].get<double>(), entry[2].get<double>()});
                } else {
                    throw ConfigError(
                        "each scenario must be a preset name, 'a/b/c' string, or 3-element array");
                }
            }
        }
        config.out_dir = root.value("out_dir", config.out_dir.string());
        config.emit_plots = root.value("emit_plots", config.emit_plots);
        config.parallel = root.value("parallel", config.parallel);
    } catch (const json::exception& e) {
        throw ConfigError("config '" + json_path.string() + "': " + e.what());
    }
    return config;
}

SeriesData load_input_series(const RunConfig& config) {
    if (config.input_path) {
        const std::size_t min_rows = static_cast<std::size_t>(config.layout.max_lag()) + 10;
        return load_csv(*config.input_path, ColumnRef::parse(config.column), NanPolicy::DropRow,
                        min_rows);
    }
    if (config.synth) {
        return synth_heart_rate(*config.synth);
    }
    throw ConfigError("no data source configured");
}

// ============================================================================
// Report emission
// ============================================================================

namespace {

// CSV fixed precision: 2 decimals for bpm-scale metrics, 4 for correlations,
// 6 for the exact efficiency ratio. The JSON carries full precision.
std::string csv_row(const ScenarioOutcome& outcome) {
    std::ostringstream row;
    row << outcome.id << ',' << format_fixed(outcome.spec.train_fraction * 100.0, 0) << ','
        << format_fixed(outcome.spec.validation_fraction * 100.0, 0) << ','
        << format_fixed(outcome.spec.test_fraction * 100.0, 0) << ',';
    if (outcome.result) {
        const MetricsReport& test = outcome.result->test.report;
        row << test.counts.t_train << ',' << format_fixed(test.mse, 2) << ','
            << format_fixed(test.pearson_r, 4) << ',' << format_fixed(test.r_squared, 4) << ','
            << format_fixed(test.mae, 2) << ',' << format_fixed(test.mape, 2) << ','
            << format_fixed(test.accuracy, 2) << ',' << format_fixed(test.efficiency, 6) << ','
            << efficiency_display(test.counts.n_total, test.counts.t_train);
    } else {
        row << ",,,,,,,,"; // failed scenario: identity columns only
    }
    return row.str();
}

json metrics_json(const MetricsReport& report) {
    return json{
        {"mse_bpm2", report.mse},
        {"mae_bpm", report.mae},
        {"mape_pct", report.mape},
        {"accuracy_pct", report.accuracy},
        {"pearson_r", report.pearson_r},
        {"r_squared", report.r_squared},
        {"efficiency", report.efficiency},
        {"counts", {{"n_total", report.counts.n_total}, {"t_train", report.counts.t_train}}},
    };
}

json split_json(const SplitIndices& split) {
    return json{
        {"train", split.train.count()},
        {"validation", split.validation.count()},
        {"test", split.test.count()},
    };
}

json scenario_json(const ScenarioOutcome& outcome) {
    json entry{
        {"scenario", outcome.id},
        {"split",
         {{"train", outcome.spec.train_fraction},
          {"validation", outcome.spec.validation_fraction},
          {"test", outcome.spec.test_fraction}}},
    };
    if (!outcome.result) {
        entry["error"] = outcome.error;
        return entry;
    }
    const SessionResult& result = *outcome.result;
    entry["counts"] = json{
        {"n_raw", result.n_raw},
        {"n_embedded", result.n_embedded},
        // Embedded-axis rows actually trained on; differs from `reported` by
        // at most the lag order.
        {"rows", split_json(result.rows)},
        {"reported", split_json(result.reported)},
    };
    entry["normalization"] = json{{"y_min", result.norm.y_min}, {"y_max", result.norm.y_max}};
    entry["reports"] = json{
        {"train", metrics_json(result.train.report)},
        {"validation", metrics_json(result.validation.report)},
        {"test", metrics_json(result.test.report)},
    };
    entry["efficiency_display"] = efficiency_display(result.test.report.counts.n_total,
                                                     result.test.report.counts.t_train);

    json trace_rows = json::array();
    for (const TraceRow& row : result.trace.rows) {
        trace_rows.push_back(json{
            {"epoch", row.epoch},
            {"train_mse_norm", row.train_mse},
            {"validation_mse_norm", row.validation_mse},
            {"mu", row.mu},
            {"gradient_inf_norm", row.gradient_inf_norm},
        });
    }
    entry["trace"] = json{
        {"rows", trace_rows},
        {"best_epoch", result.trace.best_epoch},
        {"stop_epoch", result.trace.stop_epoch},
        {"stop_reason", to_string(result.trace.stop_reason)},
    };

    json histogram = json::array();
    for (const HistogramBin& bin : result.diagnostics.error_histogram) {
        histogram.push_back(json{{"lower", bin.lower}, {"upper", bin.upper}, {"count", bin.count}});
    }
    entry["diagnostics"] = json{
        {"error_histogram", histogram},
        {"error_autocovariance",
         {{"covariance", result.diagnostics.error_autocorrelation.covariance},
          {"confidence_limit", result.diagnostics.error_autocorrelation.confidence_limit}}},
    };
    return entry;
}

json run_metadata_json(const RunConfig& config, const SeriesData& series) {
    json meta{
        {"source", series.source_label},
        {"n_raw", series.size()},
        {"layout", {{"lags", config.layout.lags}, {"hidden_units", config.layout.hidden_units}}},
        {"lm",
         {{"mu_init", config.lm.mu_init},
          {"mu_increase", config.lm.mu_increase},
          {"mu_decrease", config.lm.mu_decrease},
          {"mu_max", config.lm.mu_max},
          {"max_epochs", config.lm.max_epochs},
          {"gradient_tol", config.lm.gradient_tol},
          {"step_tol", config.lm.step_tol}}},
        {"session", {{"max_fail", config.max_fail}, {"seed", config.seed}}},
    };
    return meta;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw FileNotFound("cannot write '" + path.string() + "'");
    }
    file << content;
    if (!file.good()) {
        throw Error("write failed on '" + path.string() + "'");
    }
}

std::string scenarios_csv_text(std::span<const ScenarioOutcome> outcomes) {
    std::ostringstream csv;
    csv << "scenario,train_pct,val_pct,test_pct,t_train,mse,pearson_r,r_squared,mae,mape,"
           "accuracy,efficiency_exact,efficiency_display\n";
    for (const ScenarioOutcome& outcome : outcomes) {
        csv << csv_row(outcome) << '\n';
    }
    return csv.str();
}

std::string scenarios_json_text(const RunConfig& config, const SeriesData& series,
                                std::span<const ScenarioOutcome> outcomes) {
    json root = run_metadata_json(config, series);
    json scenario_list = json::array();
    for (const ScenarioOutcome& outcome : outcomes) {
        scenario_list.push_back(scenario_json(outcome));
    }
    root["scenarios"] = scenario_list;
    return root.dump(2) + "\n";
}

void print_summary(std::ostream& out, std::span<const ScenarioOutcome> outcomes) {
    out << "scenario  split           t_train   mse       mae     mape%   acc%    R       eff\n";
    for (const ScenarioOutcome& outcome : outcomes) {
        char split_text[32];
        std::snprintf(split_text, sizeof(split_text), "%.0f/%.0f/%.0f",
                      outcome.spec.train_fraction * 100.0,
                      outcome.spec.validation_fraction * 100.0,
                      outcome.spec.test_fraction * 100.0);
        if (!outcome.result) {
            out << outcome.id << "  " << split_text << "  failed: " << outcome.error << "\n";
            continue;
        }
        const MetricsReport& test = outcome.result->test.report;
        char line[160];
        std::snprintf(line, sizeof(line), "%-9d %-15s %-9zu %-9.2f %-7.2f %-7.2f %-7.2f %-7.4f %s",
                      outcome.id, split_text, test.counts.t_train, test.mse, test.mae, test.mape,
                      test.accuracy, test.pearson_r,
                      efficiency_display(test.counts.n_total, test.counts.t_train).c_str());
        out << line << "\n";
    }
}

} // namespace

void write_scenarios_csv(const std::filesystem::path& path,
                         std::span<const ScenarioOutcome> outcomes) {
    write_text_file(path, scenarios_csv_text(outcomes));
}

void write_scenarios_json(const std::filesystem::path& path, const RunConfig& config,
                          const SeriesData& series, std::span<const ScenarioOutcome> outcomes) {
    write_text_file(path, scenarios_json_text(config, series, outcomes));
}

void write_plots(const std::filesystem::path& plot_dir,
                 std::span<const ScenarioOutcome> outcomes) {
    std::filesystem::create_directories(plot_dir);
    for (const ScenarioOutcome& outcome : outcomes) {
        if (!outcome.result) {
            continue;
        }
        const SessionResult& result = *outcome.result;
        const std::string stem = "scenario_" + std::to_string(outcome.id) + "_";
        write_text_file(plot_dir / (stem + "performance.svg"),
                        performance_curve_svg(result.trace));
        write_text_file(plot_dir / (stem + "error_histogram.svg"),
                        error_histogram_svg(result.diagnostics.error_histogram));
        write_text_file(plot_dir / (stem + "regression.svg"),
                        regression_scatter_svg(result.test.targets, result.test.predictions,
                                               result.test.report.pearson_r));
        write_text_file(
            plot_dir / (stem + "response.svg"),
            response_series_svg(result.test.targets, result.test.predictions,
                                result.first_target_index + result.rows.test.begin));
        write_text_file(plot_dir / (stem + "autocorrelation.svg"),
                        autocorrelation_svg(result.diagnostics.error_autocorrelation));
    }
}

// ============================================================================
// CLI entry points
// ============================================================================

int cmd_synth(const SynthParams& params, const std::filesystem::path& out_csv) {
    try {
        const SeriesData series = synth_heart_rate(params);
        if (out_csv.has_parent_path()) {
            std::filesystem::create_directories(out_csv.parent_path());
        }
        write_series_csv(series, out_csv);
        std::cout << "wrote " << series.size() << " rows to " << out_csv.string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "synth failed: " << e.what() << "\n";
        return 1;
    }
}

namespace {

int run_and_report(const RunConfig& config, bool sweep) {
    config.validate();
    const SeriesData series = load_input_series(config);

    SessionConfig session_config;
    session_config.layout = config.layout;
    session_config.lm = config.lm;
    session_config.max_fail = config.max_fail;
    session_config.seed = config.seed;

    const auto started = std::chrono::steady_clock::now();
    const std::vector<ScenarioOutcome> outcomes =
        run_scenarios(series, session_config, config.scenarios, config.parallel);
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);

    std::filesystem::create_directories(config.out_dir);
    if (sweep) {
        write_scenarios_csv(config.out_dir / "scenarios.csv", outcomes);
        write_scenarios_json(config.out_dir / "scenarios.json", config, series, outcomes);
    } else {
        write_text_file(config.out_dir / "report.csv", scenarios_csv_text(outcomes));
        write_text_file(config.out_dir / "report.json",
                        scenarios_json_text(config, series, outcomes));
    }
    if (config.emit_plots) {
        write_plots(config.out_dir / "plots", outcomes);
    }

    std::cout << "input: " << series.source_label << " (" << series.size() << " samples)\n";
    print_summary(std::cout, outcomes);
    std::cout << "completed in " << format_fixed(elapsed.count(), 2) << " s; reports in "
              << config.out_dir.string() << "\n";

    for (const ScenarioOutcome& outcome : outcomes) {
        if (!outcome.result) {
            return 2; // at least one scenario failed
        }
    }
    return 0;
}

} // namespace

int cmd_run(const RunConfig& config) {
    try {
        if (config.scenarios.size() != 1) {
            throw ConfigError("run expects exactly one scenario; use the scenarios command for sweeps");
        }
        return run_and_report(config, false);
    } catch (const std::exception& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return 1;
    }
}

int cmd_scenarios(const RunConfig& config) {
    try {
        return run_and_report(config, true);
    } catch (const std::exception& e) {
        std::cerr << "scenarios failed: " << e.what() << "\n";
        return 1;
    }
}

} // namespace lmforecast
