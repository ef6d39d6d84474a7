#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lmforecast/report.hpp"

namespace {

using namespace lmforecast;

std::optional<std::uint64_t> env_seed() {
    const char* text = std::getenv("LM_FORECAST_SEED");
    if (text == nullptr || *text == '\0') {
        return std::nullopt;
    }
    std::uint64_t value = 0;
    const char* end = text + std::strlen(text);
    auto [ptr, ec] = std::from_chars(text, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("LM_FORECAST_SEED is not an unsigned integer: '" + std::string(text) +
                          "'");
    }
    return value;
}

std::vector<int> parse_lags(const std::string& text) {
    std::vector<int> lags;
    std::string token;
    std::stringstream stream(text);
    while (std::getline(stream, token, ',')) {
        const auto first = token.find_first_not_of(" \t");
        const auto last = token.find_last_not_of(" \t");
        if (first == std::string::npos) {
            throw ConfigError("empty entry in lag list '" + text + "'");
        }
        int lag = 0;
        const char* begin = token.data() + first;
        const char* end = token.data() + last + 1;
        auto [ptr, ec] = std::from_chars(begin, end, lag);
        if (ec != std::errc{} || ptr != end) {
            throw ConfigError("bad lag '" + token + "' in '" + text + "'");
        }
        lags.push_back(lag);
    }
    if (lags.empty()) {
        throw ConfigError("lag list '" + text + "' is empty");
    }
    return lags;
}

bool config_specifies_seed(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) {
        return false;
    }
    const auto root = nlohmann::json::parse(file, nullptr, false);
    return root.is_object() && root.contains("session") && root["session"].is_object() &&
           root["session"].contains("seed");
}

struct SessionOpts {
    std::string input;
    std::string column;
    std::string config_path;
    bool use_synth = false;
    SynthParams synth;
    std::vector<std::string> scenario_texts;
    std::string preset;
    std::string lags_text;
    int hidden = 0;
    std::uint64_t seed = 0;
    int max_fail = 0;
    int max_epochs = 0;
    std::string out_dir;
    bool plots = false;
    bool parallel = false;
};

void add_synth_params(CLI::App* cmd, SynthParams& params, const std::string& prefix) {
    cmd->add_option("--" + prefix + "seed", params.seed, "Generator seed");
    cmd->add_option("--" + prefix + "n", params.n, "Number of 1 Hz samples");
    cmd->add_option("--" + prefix + "base", params.base_bpm, "Baseline heart rate (bpm)");
    cmd->add_option("--" + prefix + "drift", params.drift_bpm_per_ks,
                    "Linear drift (bpm per 1000 s)");
    cmd->add_option("--" + prefix + "amp", params.modulation_amp,
                    "Sinusoidal modulation amplitude (bpm)");
    cmd->add_option("--" + prefix + "period", params.modulation_period_s,
                    "Modulation period (s)");
    cmd->add_option("--" + prefix + "noise", params.noise_std,
                    "Gaussian noise standard deviation (bpm)");
}

void add_session_options(CLI::App* cmd, SessionOpts& opts) {
    auto* input = cmd->add_option("-i,--input", opts.input, "Input CSV path");
    cmd->add_option("--column", opts.column,
                    "CSV column holding the series: a header name or a 0-based index");
    cmd->add_option("-c,--config", opts.config_path, "JSON config file");
    auto* synth = cmd->add_flag("--synth", opts.use_synth,
                                "Use the built-in synthetic generator as the data source");
    input->excludes(synth);
    add_synth_params(cmd, opts.synth, "synth-");
    cmd->add_option("--lags", opts.lags_text, "Comma-separated input lags, e.g. 1,2");
    cmd->add_option("--hidden", opts.hidden, "Hidden tanh units")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", opts.seed, "Weight-initialization seed");
    cmd->add_option("--max-fail", opts.max_fail,
                    "Consecutive validation failures before early stop")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-epochs", opts.max_epochs, "Maximum accepted training epochs")
        ->check(CLI::PositiveNumber);
    cmd->add_option("-o,--out", opts.out_dir, "Output directory (default: out)");
    cmd->add_flag("--plots", opts.plots, "Write diagnostic SVG plots");
}

RunConfig assemble(const CLI::App* cmd, const SessionOpts& opts, bool sweep) {
    RunConfig config;
    if (cmd->count("--config") > 0) {
        config = load_run_config(opts.config_path);
    }

    if (cmd->count("--input") > 0) {
        config.input_path = opts.input;
        config.synth.reset();
    }
    if (cmd->count("--synth") > 0 || cmd->count("--synth-seed") > 0 ||
        cmd->count("--synth-n") > 0) {
        SynthParams params = config.synth.value_or(SynthParams{});
        if (cmd->count("--synth-seed") > 0) params.seed = opts.synth.seed;
        if (cmd->count("--synth-n") > 0) params.n = opts.synth.n;
        if (cmd->count("--synth-base") > 0) params.base_bpm = opts.synth.base_bpm;
        if (cmd->count("--synth-drift") > 0) params.drift_bpm_per_ks = opts.synth.drift_bpm_per_ks;
        if (cmd->count("--synth-amp") > 0) params.modulation_amp = opts.synth.modulation_amp;
        if (cmd->count("--synth-period") > 0)
            params.modulation_period_s = opts.synth.modulation_period_s;
        if (cmd->count("--synth-noise") > 0) params.noise_std = opts.synth.noise_std;
        config.synth = params;
        config.input_path.reset();
    }
    if (cmd->count("--column") > 0) {
        config.column = opts.column;
    }
    if (cmd->count("--lags") > 0) {
        config.layout.lags = parse_lags(opts.lags_text);
    }
    if (cmd->count("--hidden") > 0) {
        config.layout.hidden_units = opts.hidden;
    }
    if (cmd->count("--max-fail") > 0) {
        config.max_fail = opts.max_fail;
    }
    if (cmd->count("--max-epochs") > 0) {
        config.lm.max_epochs = opts.max_epochs;
    }
    if (cmd->count("--out") > 0) {
        config.out_dir = opts.out_dir;
    }
    if (opts.plots) {
        config.emit_plots = true;
    }
    if (opts.parallel) {
        config.parallel = true;
    }

    // Seed precedence: flag, then config file, then LM_FORECAST_SEED, then 1.
    if (cmd->count("--seed") > 0) {
        config.seed = opts.seed;
    } else if (cmd->count("--config") == 0 || !config_specifies_seed(opts.config_path)) {
        if (auto seed = env_seed()) {
            config.seed = *seed;
        }
    }

    std::vector<SplitSpec> from_flags;
    if (!opts.preset.empty()) {
        auto preset = preset_by_name(opts.preset);
        if (!preset) {
            throw ConfigError("unknown preset '" + opts.preset + "' (try table4 or table7)");
        }
        from_flags = *preset;
    }
    for (const std::string& text : opts.scenario_texts) {
        from_flags.push_back(parse_split_text(text));
    }
    if (!from_flags.empty()) {
        config.scenarios = std::move(from_flags);
    }
    if (config.scenarios.empty()) {
        if (sweep) {
            config.scenarios = preset_table4();
        } else {
            config.scenarios = {SplitSpec{0.70, 0.15, 0.15}};
        }
    }
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"One-step-ahead heart-rate forecasting with a tanh autoregressive network "
                 "trained by Levenberg-Marquardt"};
    app.require_subcommand(1);

    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic heart-rate CSV");
    SynthParams synth_params;
    std::string synth_out;
    synth_cmd->add_option("-o,--out", synth_out, "Output CSV path")->required();
    synth_cmd->add_option("--seed", synth_params.seed, "Generator seed");
    synth_cmd->add_option("--n", synth_params.n, "Number of 1 Hz samples");
    synth_cmd->add_option("--base", synth_params.base_bpm, "Baseline heart rate (bpm)");
    synth_cmd->add_option("--drift", synth_params.drift_bpm_per_ks,
                          "Linear drift (bpm per 1000 s)");
    synth_cmd->add_option("--amp", synth_params.modulation_amp,
                          "Sinusoidal modulation amplitude (bpm)");
    synth_cmd->add_option("--period", synth_params.modulation_period_s, "Modulation period (s)");
    synth_cmd->add_option("--noise", synth_params.noise_std,
                          "Gaussian noise standard deviation (bpm)");

    auto* run_cmd = app.add_subcommand(
        "run", "Train and evaluate a single train/validation/test split");
    SessionOpts run_opts;
    add_session_options(run_cmd, run_opts);
    run_cmd->add_option("--scenario", run_opts.scenario_texts,
                        "Split as train/val/test, e.g. 70/15/15")
        ->expected(1);

    auto* sweep_cmd =
        app.add_subcommand("scenarios", "Sweep several splits and tabulate test metrics");
    SessionOpts sweep_opts;
    add_session_options(sweep_cmd, sweep_opts);
    sweep_cmd->add_option("--scenario", sweep_opts.scenario_texts,
                          "Split as train/val/test; may be repeated");
    sweep_cmd->add_option("--preset", sweep_opts.preset, "Scenario preset: table4 or table7");
    sweep_cmd->add_flag("--parallel", sweep_opts.parallel, "Run scenarios concurrently");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(synth_cmd)) {
            if (synth_cmd->count("--seed") == 0) {
                if (auto seed = env_seed()) {
                    synth_params.seed = *seed;
                }
            }
            return cmd_synth(synth_params, synth_out);
        }
        if (app.got_subcommand(run_cmd)) {
            return cmd_run(assemble(run_cmd, run_opts, false));
        }
        return cmd_scenarios(assemble(sweep_cmd, sweep_opts, true));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
