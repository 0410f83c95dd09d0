// Copyright (C) 2026 the Triage authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "triage/errors.hpp"
#include "triage/pipeline.hpp"
#include "triage/scenario.hpp"
#include "triage/synth.hpp"
#include "triage/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitInputError = 2;
constexpr int kExitConfigError = 3;
constexpr int kExitInternalError = 4;

struct RunArgs {
    std::string scenario_dir;
    std::string out_path;
    std::string config_path;
    std::int64_t keyframes = 0;
    double frame_retention = 0.0;
    std::int64_t buckets = 8;
    std::vector<double> weights;
    double retention = 0.5;
    std::int64_t token_budget = 0;
    double core_ratio = 0.25;
    std::int64_t seeds = 4;
    double lambda = 0.5;
    bool dump_intermediates = false;
    std::int64_t kv_layers = 28;
    std::int64_t kv_heads = 4;
    std::int64_t kv_head_dim = 128;
    std::int64_t kv_bytes = 2;
};

// Precedence: command-line flags > config file > defaults. The config file
// is a JSON object keyed like the flags (without the leading dashes).
void apply_config_file(const CLI::App& cmd, RunArgs& args) {
    if (args.config_path.empty()) return;
    std::ifstream in(args.config_path);
    if (!in)
        throw triage::ConfigError("cannot open config file " +
                                  args.config_path);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw triage::ConfigError("invalid config JSON: " +
                                  std::string(e.what()));
    }
    if (!doc.is_object())
        throw triage::ConfigError("config file must be a JSON object");

    const auto flag_given = [&](const std::string& name) {
        const CLI::Option* opt = cmd.get_option_no_throw("--" + name);
        return opt != nullptr && opt->count() > 0;
    };
    const auto load = [&](const std::string& key, auto& slot) {
        if (!doc.contains(key) || flag_given(key)) return;
        try {
            slot = doc[key].get<std::decay_t<decltype(slot)>>();
        } catch (const nlohmann::json::exception&) {
            throw triage::ConfigError("config key '" + key +
                                      "' has the wrong type");
        }
    };
    load("keyframes", args.keyframes);
    load("frame-retention", args.frame_retention);
    load("buckets", args.buckets);
    load("weights", args.weights);
    load("retention", args.retention);
    load("token-budget", args.token_budget);
    load("core-ratio", args.core_ratio);
    load("seeds", args.seeds);
    load("lambda", args.lambda);
    load("dump-intermediates", args.dump_intermediates);
    load("kv-layers", args.kv_layers);
    load("kv-heads", args.kv_heads);
    load("kv-head-dim", args.kv_head_dim);
    load("kv-bytes", args.kv_bytes);

    for (const auto& [key, value] : doc.items()) {
        static const char* known[] = {
            "keyframes", "frame-retention", "buckets", "weights",
            "retention", "token-budget", "core-ratio", "seeds",
            "lambda", "dump-intermediates", "kv-layers", "kv-heads",
            "kv-head-dim", "kv-bytes"};
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok)
            throw triage::ConfigError("unknown config key '" + key + "'");
    }
}

int do_run(const CLI::App& cmd, RunArgs& args) {
    apply_config_file(cmd, args);

    triage::PipelineConfig config;
    const auto flag_given = [&](const std::string& name) {
        const CLI::Option* opt = cmd.get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (flag_given("--keyframes") || args.keyframes > 0)
        config.keyframe_budget = args.keyframes;
    if (flag_given("--frame-retention") || args.frame_retention > 0.0)
        config.frame_retention = args.frame_retention;
    if (config.keyframe_budget && config.frame_retention)
        throw triage::ConfigError(
            "--keyframes and --frame-retention are mutually exclusive");
    config.buckets = args.buckets;
    if (!args.weights.empty()) {
        if (args.weights.size() != 3)
            throw triage::ConfigError(
                "--weights needs exactly three comma-separated values");
        config.weights.change = static_cast<float>(args.weights[0]);
        config.weights.motion = static_cast<float>(args.weights[1]);
        config.weights.relevance = static_cast<float>(args.weights[2]);
    }
    config.weights.validate();
    if (flag_given("--token-budget") || args.token_budget > 0)
        config.token_budget = args.token_budget;
    config.retention = args.retention;
    config.core_ratio = args.core_ratio;
    config.seeds_per_frame = args.seeds;
    config.lambda = args.lambda;
    config.dump_intermediates = args.dump_intermediates;
    config.cost_model = {args.kv_layers, args.kv_heads, args.kv_head_dim,
                         args.kv_bytes};

    const triage::Scenario scenario = triage::load_scenario(args.scenario_dir);
    const triage::SelectionManifest manifest =
        triage::run_pipeline(scenario, config);

    const std::filesystem::path out = args.out_path;
    triage::write_text_atomic(triage::manifest_to_json(manifest, config), out);
    if (config.dump_intermediates) {
        const std::filesystem::path dir =
            out.has_parent_path() ? out.parent_path()
                                  : std::filesystem::path(".");
        triage::write_intermediates(manifest, dir);
    }
    std::cout << out.string() << "\n";
    return kExitOk;
}

int do_verify(const std::string& scenario_dir, std::int64_t trials,
              std::uint64_t seed) {
    triage::VerifyReport report;
    if (!scenario_dir.empty()) {
        report = triage::verify_scenario(triage::load_scenario(scenario_dir));
    } else {
        report = triage::verify_random(trials, seed);
    }
    std::cout << triage::format_report(report);
    return report.all_passed() ? kExitOk : kExitCheckFailure;
}

int do_synth(const std::string& spec_path, const std::string& out_dir) {
    const triage::ScenarioSpec spec =
        triage::ScenarioSpec::from_json_file(spec_path);
    const triage::Scenario scenario = triage::generate(spec);
    triage::write_scenario(scenario, &spec, out_dir);
    std::cout << out_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"triage - hierarchical visual budgeting engine"};
    app.require_subcommand(1);

    RunArgs run_args;
    CLI::App* run = app.add_subcommand(
        "run", "run frame- and token-level budgeting on a scenario");
    run->add_option("--scenario", run_args.scenario_dir, "scenario directory")
        ->required();
    run->add_option("--out", run_args.out_path, "manifest output path")
        ->required();
    run->add_option("--config", run_args.config_path,
                    "JSON config file (flags take precedence)");
    run->add_option("--keyframes", run_args.keyframes,
                    "keyframe budget M (default min(8, N))");
    run->add_option("--frame-retention", run_args.frame_retention,
                    "keyframe budget as a fraction of N");
    run->add_option("--buckets", run_args.buckets,
                    "temporal bucket count K");
    run->add_option("--weights", run_args.weights,
                    "scene-change,motion,relevance weights")
        ->delimiter(',');
    run->add_option("--retention", run_args.retention,
                    "token retention ratio over selected keyframes' tokens");
    run->add_option("--token-budget", run_args.token_budget,
                    "absolute token budget B_T (overrides --retention)");
    run->add_option("--core-ratio", run_args.core_ratio,
                    "fraction of B_T reserved for core tokens");
    run->add_option("--seeds", run_args.seeds, "seed tokens per frame");
    run->add_option("--lambda", run_args.lambda, "MMR diversity weight");
    run->add_flag("--dump-intermediates", run_args.dump_intermediates,
                  "also write frame scores, keyframes and token bundles");
    run->add_option("--kv-layers", run_args.kv_layers, "cost model: layers");
    run->add_option("--kv-heads", run_args.kv_heads, "cost model: KV heads");
    run->add_option("--kv-head-dim", run_args.kv_head_dim,
                    "cost model: head dimension");
    run->add_option("--kv-bytes", run_args.kv_bytes,
                    "cost model: bytes per element");

    std::string verify_scenario_dir;
    std::int64_t verify_trials = 1000;
    std::uint64_t verify_seed = 7;
    CLI::App* verify = app.add_subcommand(
        "verify", "cross-check the selection kernels against brute-force "
                  "oracles");
    verify->add_option("--scenario", verify_scenario_dir,
                       "verify against a concrete scenario directory");
    verify->add_option("--random", verify_trials,
                       "number of random instances");
    verify->add_option("--seed", verify_seed, "rng seed for --random");

    std::string synth_spec_path;
    std::string synth_out_dir;
    CLI::App* synth = app.add_subcommand(
        "synth", "generate a reproducible synthetic scenario");
    synth->add_option("--spec", synth_spec_path, "scenario spec JSON")
        ->required();
    synth->add_option("--out", synth_out_dir, "output scenario directory")
        ->required();

    try {
        app.parse(argc, argv);
        if (run->parsed()) return do_run(*run, run_args);
        if (verify->parsed())
            return do_verify(verify_scenario_dir, verify_trials, verify_seed);
        if (synth->parsed()) return do_synth(synth_spec_path, synth_out_dir);
        return kExitConfigError;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    } catch (const triage::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const triage::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const triage::InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternalError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternalError;
    }
}
