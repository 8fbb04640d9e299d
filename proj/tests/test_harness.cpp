#include <gtest/gtest.h>

#include <csrl/harness.hpp>

#include <fstream>
#include <sstream>

using namespace csrl;
using namespace csrl::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "csrl_test_harness";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig tiny() {
    ExperimentConfig c;
    c.dataset.n = 16;
    c.dataset.k = 2;
    c.dataset.count = 8;
    c.codec.n = 16;
    c.hidden_actor = c.hidden_critic = c.hidden_qnet = 20;
    c.steps = 6;
    c.acquisitions_per_step = 5;
    c.eval_interval = 2;
    c.seeds = {0, 1};
    c.workers = 1;
    return c;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

} // namespace

TEST(Config, JsonRoundTrip) {
    auto c = tiny();
    c.gamma = 0.25;
    c.codec.solver = cs::Solver::lp;
    c.action_set = {0.2, 0.4, 0.9};
    const auto back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
}

TEST(Config, OverlaysOnlyPresentKeys) {
    const auto c = config_from_json(json{{"steps", 17}});
    EXPECT_EQ(c.steps, 17u);
    EXPECT_EQ(c.hidden_qnet, ExperimentConfig{}.hidden_qnet);
    EXPECT_EQ(c.eta, ExperimentConfig{}.eta);
}

TEST(Config, RejectsUnknownKeys) {
    EXPECT_THROW(config_from_json(json{{"stepz", 3}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"dataset", {{"sidee", 3}}}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"epsilon", {{"start", 1.0}, {"flor", 0.1}}}}), ConfigError);
}

TEST(Config, ValidationErrors) {
    EXPECT_THROW(config_from_json(json{{"agent", "dqn"}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"gamma", 1.5}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"action_set", {0.5, 0.2, 0.5}}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"seeds", json::array()}}), ConfigError);
    EXPECT_THROW(config_from_json(json{{"ridge", 0.0}}), ConfigError);
}

TEST(Config, FileErrors) {
    try {
        load_config(scratch("missing.json").string());
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("config not found"), std::string::npos);
    }
    std::ofstream(scratch("broken.json")) << "{ steps: ";
    try {
        load_config(scratch("broken.json").string());
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("invalid config"), std::string::npos);
    }
}

TEST(Config, FullProfileDiffersFromDesk) {
    const auto p = full_profile();
    EXPECT_EQ(p.dataset.kind, "mnist");
    EXPECT_EQ(p.codec.solver, cs::Solver::lp);
    EXPECT_EQ(p.steps, 1000u);
}

TEST(Timing, MedianOfOddAndEven) {
    EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
    EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
}

TEST(Parallel, PreservesJobOrder) {
    const auto r = run_parallel(50, 4, [](std::size_t i) { return i * i; });
    for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(r[i], i * i);
    EXPECT_THROW(run_parallel(5, 2, [](std::size_t i) -> int { if (i == 3) throw std::runtime_error("x"); return 0; }),
                 std::runtime_error);
}

TEST(Experiment, ZeroStepsGivesEmptyMetrics) {
    auto c = tiny();
    c.steps = 0;
    c.out_dir = scratch("zero").string();
    const auto res = run_experiment(c);
    const auto csv = slurp(res.metrics_csv);
    EXPECT_EQ(count_lines(csv), 2u);
    EXPECT_EQ(csv.rfind("# config=", 0), 0u);
    const auto summary = json::parse(slurp(res.summary_json));
    EXPECT_EQ(summary.at("replicas").size(), 4u);
    EXPECT_TRUE(summary.at("aggregate").contains("acoselm"));
}

TEST(Experiment, MetricsLayout) {
    auto c = tiny();
    c.out_dir = scratch("layout").string();
    const auto res = run_experiment(c);
    std::istringstream in(slurp(res.metrics_csv));
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line.rfind("# config=", 0), 0u);
    EXPECT_EQ(json::parse(line.substr(9)).count("out_dir"), 0u);
    std::getline(in, line);
    EXPECT_EQ(line, kMetricsHeader);
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    // 2 agents x 2 seeds x (step 0 + steps 2, 4, 6)
    EXPECT_EQ(rows, 16u);
    EXPECT_EQ(res.replicas.front().timings.size(), 6u);
    for (const auto& r : res.replicas) {
        EXPECT_EQ(r.evaluations.front().step, 0u);
        EXPECT_EQ(r.evaluations.back().step, 6u);
        for (const auto& e : r.evaluations) EXPECT_LE(e.eval.mean_reward, 1.0);
    }
}

TEST(Experiment, ByteIdenticalAcrossRunsAndWorkerCounts) {
    auto c = tiny();
    c.out_dir = scratch("det_a").string();
    const auto a = slurp(run_experiment(c).metrics_csv);
    c.out_dir = scratch("det_b").string();
    c.workers = 3;
    const auto b = slurp(run_experiment(c).metrics_csv);
    EXPECT_EQ(a, b);
}

TEST(Experiment, UntrainedActorStartsAtHalf) {
    auto c = tiny();
    c.agent = "acoselm";
    c.seeds = {0};
    c.out_dir = scratch("half").string();
    const auto res = run_experiment(c);
    EXPECT_DOUBLE_EQ(res.replicas[0].evaluations[0].eval.action_mean, 0.5);
}

TEST(Sweep, FullRatioScoresZero) {
    auto c = tiny();
    c.codec.solver = cs::Solver::lp;
    const auto data = env::synth_sparse(16, 3, 5, 0);
    for (const auto& r : sweep_scores(data, {1.0}, c)) {
        EXPECT_EQ(r.m, 16u);
        EXPECT_NEAR(r.score, 0.0, 1e-9);
    }
    EXPECT_THROW(sweep_scores(data, {0.0}, c), std::domain_error);
}

TEST(Sweep, MidRatiosBeatExtremesOnSparseData) {
    auto c = tiny();
    c.codec.solver = cs::Solver::lp;
    const auto data = env::synth_sparse(64, 4, 20, 1);
    const auto rows = sweep_scores(data, {0.1, 0.4, 0.9}, c);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < 20; ++i) ok += rows[3 * i + 1].score > std::max(rows[3 * i].score, rows[3 * i + 2].score);
    EXPECT_GE(ok, 18u);
}

TEST(Sweep, CsvHasHeaderAndRows) {
    auto c = tiny();
    const auto data = env::synth_sparse(16, 2, 3, 0);
    const auto rows = sweep_scores(data, default_sweep_ratios(), c);
    EXPECT_EQ(rows.size(), 60u);
    const auto p = scratch("sweep/sweep.csv");
    write_sweep_csv(p, rows, c);
    const auto text = slurp(p);
    EXPECT_NE(text.find("\nsample,ratio,m,rmse,score,converged\n"), std::string::npos);
    EXPECT_EQ(count_lines(text), 62u);
}

TEST(Bench, ReportSchema) {
    auto c = tiny();
    c.bench_repetitions = 5;
    const auto rep = bench_timing(c);
    const auto j = to_json(rep, c);
    for (const char* k : {"compress", "recover", "osqnet_inference", "acoselm_inference",
                          "osqnet_inference_doubled_actions", "osqnet_update", "acoselm_update"}) {
        ASSERT_TRUE(j.at("median_ms").contains(k)) << k;
        EXPECT_GE(j.at("median_ms").at(k).get<double>(), 0.0) << k;
    }
    EXPECT_EQ(j.at("complexity").size(), 6u);
    EXPECT_EQ(j.at("actions"), 10);
    EXPECT_EQ(doubled_grid(c.action_set).size(), 20u);
}

TEST(Datasets, LoadBySpec) {
    DatasetSpec s;
    s.kind = "strokes";
    s.side = 16;
    s.count = 3;
    s.downscale = 2;
    const auto d = load_dataset(s);
    EXPECT_EQ(d.dim, 64u);
    EXPECT_EQ(d.size(), 3u);
    s.kind = "nope";
    EXPECT_THROW(load_dataset(s), ConfigError);
    s.kind = "idx";
    s.path = scratch("absent.idx").string();
    EXPECT_THROW(load_dataset(s), env::DatasetError);
}
