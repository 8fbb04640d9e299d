// csrl: command-line front end for the adaptive compressed-sensing experiments.
//
//   csrl run          train agents online and write metrics.csv / timings.csv / summary.json
//   csrl sweep        per-sample compression score at a grid of ratios (scores.csv)
//   csrl bench        median timings of codec and agent operations (bench.json)
//   csrl recover-demo compress/recover/score one datum at one ratio

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include <csrl/harness.hpp>

namespace {

using namespace csrl;

enum ExitCode { kOk = 0, kError = 1, kUsage = 2, kConfigMissing = 3, kConfigInvalid = 4, kDataError = 5 };

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string dataset;
    std::string agent;
    std::optional<std::size_t> steps;
    std::string profile = "desk";
};

// --dataset shorthand: synthetic | strokes | mnist | <path to .csv or IDX file>
void apply_dataset(harness::DatasetSpec& spec, const std::string& arg) {
    if (arg.empty()) return;
    if (arg == "synthetic" || arg == "strokes" || arg == "mnist") {
        spec.kind = arg;
        if (arg == "mnist") spec.path.clear();
        return;
    }
    if (!std::filesystem::exists(arg)) throw env::DatasetError("dataset file not found: " + arg);
    spec.path = arg;
    spec.kind = std::filesystem::path(arg).extension() == ".csv" ? "csv" : "idx";
}

harness::ExperimentConfig resolve(const CommonOptions& o) {
    harness::ExperimentConfig cfg = o.profile == "full" ? harness::full_profile() : harness::ExperimentConfig{};
    cfg.out_dir = harness::default_out_dir();
    if (!o.config_path.empty()) cfg = harness::load_config(o.config_path, cfg);
    apply_dataset(cfg.dataset, o.dataset);
    if (!o.agent.empty()) cfg.agent = o.agent;
    if (o.steps) cfg.steps = *o.steps;
    if (o.seed) cfg.seeds = {*o.seed};
    if (!o.out_dir.empty()) cfg.out_dir = o.out_dir;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "JSON experiment config");
    cmd->add_option("--seed", o.seed, "Single replica seed (overrides config seeds)");
    cmd->add_option("--out-dir", o.out_dir, "Output directory (default $CSRL_OUT_DIR or ./results)");
    cmd->add_option("--dataset", o.dataset, "synthetic | strokes | mnist | path to .csv / IDX file");
    cmd->add_option("--agent", o.agent, "osqnet | acoselm | both")->check(CLI::IsMember({"osqnet", "acoselm", "both"}));
    cmd->add_option("--steps", o.steps, "Training steps");
    cmd->add_option("--profile", o.profile, "desk (default) or full (784-dim, LP, 1000 steps)")
        ->check(CLI::IsMember({"desk", "full"}));
}

int cmd_run(const CommonOptions& o) {
    const auto cfg = resolve(o);
    const auto res = harness::run_experiment(cfg);
    for (const auto& [kind, agg] : res.summary.at("aggregate").items())
        std::cout << kind << " max/mean-last10: " << agg.at("table").get<std::string>() << '\n';
    std::cout << "wrote " << res.metrics_csv.string() << ", " << res.timings_csv.string() << ", "
              << res.summary_json.string() << '\n';
    return kOk;
}

int cmd_sweep(const CommonOptions& o, const std::vector<double>& ratios) {
    const auto cfg = resolve(o);
    const auto data = harness::load_dataset(cfg.dataset);
    const auto rows = harness::sweep_scores(data, ratios.empty() ? harness::default_sweep_ratios() : ratios, cfg);
    const auto path = std::filesystem::path(cfg.out_dir) / "scores.csv";
    harness::write_sweep_csv(path, rows, cfg);
    std::cout << "wrote " << rows.size() << " rows to " << path.string() << '\n';
    return kOk;
}

int cmd_bench(const CommonOptions& o, std::optional<std::size_t> reps) {
    auto cfg = resolve(o);
    if (reps) cfg.bench_repetitions = *reps;
    const auto report = harness::bench_timing(cfg);
    const json j = harness::to_json(report, cfg);
    std::filesystem::create_directories(cfg.out_dir);
    const auto path = std::filesystem::path(cfg.out_dir) / "bench.json";
    std::ofstream(path) << j.dump(2) << '\n';
    std::cout << j.at("median_ms").dump(2) << '\n'
              << "inference ratio osqnet/acoselm: " << report.inference_ratio() << '\n'
              << "update ratio acoselm/osqnet: " << report.update_ratio() << '\n'
              << "wrote " << path.string() << '\n';
    return kOk;
}

int cmd_recover_demo(const CommonOptions& o, std::size_t index, double ratio) {
    const auto cfg = resolve(o);
    const auto data = harness::load_dataset(cfg.dataset);
    if (index >= data.size())
        throw env::DatasetError("index " + std::to_string(index) + " out of range (dataset has " +
                                std::to_string(data.size()) + " samples)");
    cs::CodecConfig codec = cfg.codec;
    codec.n = data.dim;
    const env::CompressionEnv env(codec, cfg.score, data);
    const auto r = env::env_step_detailed(env, data.samples[index], ratio);
    std::printf("c = %.4f, m = %zu, e(c) = %.6f, E(c) = %.6f%s\n", ratio, r.m, r.rmse, r.reward,
                r.failed ? " (recovery failed)" : "");
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive compression-ratio selection for compressed sensing"};
    app.require_subcommand(1);

    CommonOptions run_opts, sweep_opts, bench_opts, demo_opts;
    auto* run = app.add_subcommand("run", "Train agents online and record learning curves");
    add_common(run, run_opts);

    auto* sweep = app.add_subcommand("sweep", "Score every sample at a grid of compression ratios");
    add_common(sweep, sweep_opts);
    std::vector<double> ratios;
    sweep->add_option("--ratios", ratios, "Ratios in (0,1]")->delimiter(',');

    auto* bench = app.add_subcommand("bench", "Median timings of codec and agent operations");
    add_common(bench, bench_opts);
    std::optional<std::size_t> reps;
    bench->add_option("--repetitions", reps, "Repetitions per measurement (>= 100 recommended)");

    auto* demo = app.add_subcommand("recover-demo", "Compress, recover and score one datum");
    add_common(demo, demo_opts);
    std::size_t index = 0;
    double ratio = 0.5;
    demo->add_option("--index", index, "Sample index");
    demo->add_option("--ratio", ratio, "Compression ratio in (0,1]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*run) return cmd_run(run_opts);
        if (*sweep) return cmd_sweep(sweep_opts, ratios);
        if (*bench) return cmd_bench(bench_opts, reps);
        if (*demo) return cmd_recover_demo(demo_opts, index, ratio);
    } catch (const harness::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return std::string(e.what()).rfind("config not found", 0) == 0 ? kConfigMissing : kConfigInvalid;
    } catch (const env::DatasetError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kError;
    }
    return kError;
}
