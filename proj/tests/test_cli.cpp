#include <gtest/gtest.h>

#include <csrl/env.hpp>
#include <csrl/serialize.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Output {
    int code = -1;
    std::string text;
};

// Runs the CLI through the shell with stderr folded into the captured text.
Output run(const std::string& args, const std::string& env_prefix = "") {
    const std::string cmd = env_prefix + " '" + std::string(CSRL_CLI_PATH) + "' " + args + " 2>&1";
    Output out;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return out;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, p)) out.text += buf;
    const int status = pclose(p);
    out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "csrl_test_cli";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Key structure of a JSON value with leaf values erased.
csrl::json shape(const csrl::json& j) {
    if (j.is_object()) {
        csrl::json o = csrl::json::object();
        for (const auto& [k, v] : j.items()) o[k] = shape(v);
        return o;
    }
    if (j.is_array()) return "array";
    return j.type_name();
}

} // namespace

TEST(Cli, MissingConfigIsReported) {
    const auto r = run("run --config " + scratch("missing.json").string());
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.text.find("config not found"), std::string::npos) << r.text;
}

TEST(Cli, InvalidConfigIsReported) {
    std::ofstream(scratch("bad.json")) << R"({"steps": 3, "unknown_key": 1})";
    const auto r = run("run --config " + scratch("bad.json").string());
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.text.find("invalid config"), std::string::npos) << r.text;
}

TEST(Cli, UnknownFlagIsUsageError) {
    EXPECT_NE(run("run --no-such-flag").code, 0);
    EXPECT_NE(run("frobnicate").code, 0);
}

TEST(Cli, RecoverDemoOnIdxFile) {
    const auto idx = scratch("images.idx");
    csrl::env::write_idx(idx.string(), csrl::env::synth_strokes(28, 3, 0), 28, 28);
    const auto r = run("recover-demo --dataset mnist --index 0 --ratio 0.5", "CSRL_MNIST='" + idx.string() + "'");
    ASSERT_EQ(r.code, 0) << r.text;
    EXPECT_NE(r.text.find("c = 0.5000, m = 392"), std::string::npos) << r.text;
    EXPECT_NE(r.text.find("E(c) = "), std::string::npos);
    const auto missing = run("recover-demo --dataset mnist", "CSRL_MNIST='" + scratch("nope.idx").string() + "'");
    EXPECT_NE(missing.code, 0);
    EXPECT_NE(missing.text.find("not found"), std::string::npos) << missing.text;
}

TEST(Cli, RunWritesOutputs) {
    std::ofstream(scratch("small.json")) << R"({"steps": 4, "eval_interval": 2, "hidden_qnet": 20,
        "hidden_actor": 20, "hidden_critic": 20, "dataset": {"n": 16, "count": 5}})";
    const auto dir = scratch("run_out");
    fs::remove_all(dir);
    const auto r = run("run --config " + scratch("small.json").string() + " --out-dir " + dir.string());
    ASSERT_EQ(r.code, 0) << r.text;
    for (const char* f : {"metrics.csv", "timings.csv", "summary.json"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
    EXPECT_EQ(csrl::json::parse(slurp(dir / "summary.json")).at("replicas").size(), 2u);
}

TEST(Cli, SweepWritesScores) {
    const auto dir = scratch("sweep_out");
    fs::remove_all(dir);
    std::ofstream(scratch("strokes.json")) << R"({"dataset": {"kind": "strokes", "side": 16, "count": 4, "downscale": 2}})";
    const auto r = run("sweep --config " + scratch("strokes.json").string() + " --ratios 0.25,0.5 --out-dir " + dir.string());
    ASSERT_EQ(r.code, 0) << r.text;
    const auto text = slurp(dir / "scores.csv");
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 10);
}

TEST(Cli, BenchReportsShareSchema) {
    std::ofstream(scratch("bench.json")) << R"({"hidden_qnet": 30, "hidden_actor": 30, "hidden_critic": 30,
        "dataset": {"n": 16, "count": 5}})";
    const auto a = scratch("bench_a"), b = scratch("bench_b");
    const std::string base = "bench --repetitions 3 --config " + scratch("bench.json").string() + " --out-dir ";
    ASSERT_EQ(run(base + a.string()).code, 0);
    ASSERT_EQ(run(base + b.string()).code, 0);
    const auto ja = csrl::json::parse(slurp(a / "bench.json")), jb = csrl::json::parse(slurp(b / "bench.json"));
    EXPECT_EQ(shape(ja), shape(jb));
    EXPECT_EQ(ja.at("config"), jb.at("config"));
}
