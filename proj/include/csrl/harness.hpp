#pragma once

// Experiment runner, score sweeps and timing benchmarks. Outputs are plot-ready:
// CSV for time series, JSON for summaries. Every file embeds the resolved config.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "agents.hpp"
#include "cs.hpp"
#include "env.hpp"
#include "serialize.hpp"

namespace csrl::harness {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DatasetSpec {
    std::string kind = "synthetic"; // synthetic | strokes | idx | csv | mnist
    std::size_t n = 64;             // synthetic
    std::size_t k = 4;              // synthetic
    std::size_t count = 100;
    std::uint64_t seed = 0;
    std::size_t side = 32;          // strokes
    std::size_t downscale = 1;
    std::string path;               // idx | csv | mnist
};

struct ExperimentConfig {
    DatasetSpec dataset;
    std::string agent = "both"; // osqnet | acoselm | both
    std::size_t hidden_actor = 400;
    std::size_t hidden_critic = 400;
    std::size_t hidden_qnet = 400;
    std::size_t steps = 200;
    std::size_t acquisitions_per_step = 10;
    cs::ScoreParams score{};
    cs::CodecConfig codec{64, cs::Basis::identity, cs::Solver::ista, 0, {}};
    agents::DecaySchedule epsilon{1.0, 0.01, 2000.0};
    agents::DecaySchedule noise{0.3, 0.01, 2000.0};
    double gamma = 0.0;
    double eta = 0.01;
    double lambda = 1.0;
    double ridge = 1e-3;
    std::size_t update_period = 10;
    std::vector<double> action_set = agents::default_action_grid();
    double action_min = 0.01;
    double action_max = 1.0;
    std::vector<std::uint64_t> seeds{0};
    std::size_t eval_interval = 10;
    std::size_t bench_repetitions = 100;
    std::size_t workers = 0; // 0: hardware concurrency
    std::string out_dir = "results";

    std::vector<std::string> agent_kinds() const {
        if (agent == "both") return {"osqnet", "acoselm"};
        return {agent};
    }

    void validate() const {
        auto positive = [](std::size_t v, const char* name) {
            if (v == 0) throw ConfigError(std::string("invalid config: ") + name + " must be positive");
        };
        if (agent != "osqnet" && agent != "acoselm" && agent != "both")
            throw ConfigError("invalid config: agent must be osqnet, acoselm or both");
        positive(hidden_actor, "hidden_actor");
        positive(hidden_critic, "hidden_critic");
        positive(hidden_qnet, "hidden_qnet");
        positive(acquisitions_per_step, "acquisitions_per_step");
        positive(update_period, "update_period");
        positive(eval_interval, "eval_interval");
        positive(bench_repetitions, "bench_repetitions");
        positive(dataset.count, "dataset.count");
        if (seeds.empty()) throw ConfigError("invalid config: seeds must be nonempty");
        if (action_set.empty()) throw ConfigError("invalid config: action_set must be nonempty");
        for (std::size_t i = 0; i < action_set.size(); ++i) {
            if (!(action_set[i] > 0.0) || action_set[i] > 1.0)
                throw ConfigError("invalid config: action_set values must lie in (0, 1]");
            if (std::count(action_set.begin(), action_set.end(), action_set[i]) > 1)
                throw ConfigError("invalid config: action_set values must be distinct");
        }
        if (!(action_min > 0.0) || action_max > 1.0 || !(action_min < action_max))
            throw ConfigError("invalid config: action_bounds must satisfy 0 < min < max <= 1");
        if (gamma < 0.0 || gamma > 1.0) throw ConfigError("invalid config: gamma must lie in [0, 1]");
        if (eta < 0.0) throw ConfigError("invalid config: eta must be >= 0");
        if (!(lambda > 0.0)) throw ConfigError("invalid config: lambda must be > 0");
        if (!(ridge > 0.0)) throw ConfigError("invalid config: ridge must be > 0");
        try {
            codec.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("invalid config: ") + e.what());
        }
    }
};

/// 784-dimensional MNIST, LP recovery, 1000 steps. Long-running.
inline ExperimentConfig full_profile() {
    ExperimentConfig cfg;
    cfg.dataset.kind = "mnist";
    cfg.dataset.count = 100;
    cfg.steps = 1000;
    cfg.codec.solver = cs::Solver::lp;
    return cfg;
}

// ---- config (de)serialization -------------------------------------------------

namespace detail {

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError("invalid config: " + where + " must be an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("invalid config: unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config: field '") + key + "': " + e.what());
    }
}

inline json schedule_json(const agents::DecaySchedule& s) {
    return {{"start", s.start}, {"floor", s.floor}, {"tau", s.tau}};
}

inline void read_schedule(const json& j, const char* key, agents::DecaySchedule& s) {
    if (!j.contains(key)) return;
    const auto& o = j.at(key);
    reject_unknown(o, {"start", "floor", "tau"}, key);
    read(o, "start", s.start);
    read(o, "floor", s.floor);
    read(o, "tau", s.tau);
}

} // namespace detail

inline json to_json(const DatasetSpec& d) {
    return {{"kind", d.kind}, {"n", d.n},       {"k", d.k},
            {"count", d.count}, {"seed", d.seed}, {"side", d.side},
            {"downscale", d.downscale}, {"path", d.path}};
}

inline json to_json(const cs::CodecConfig& c) {
    return {{"basis", cs::to_string(c.basis)},
            {"solver", cs::to_string(c.solver)},
            {"master_seed", c.master_seed},
            {"ista",
             {{"max_iters", c.ista.max_iters},
              {"lambda", c.ista.lambda},
              {"tol", c.ista.tol},
              {"accelerated", c.ista.accelerated},
              {"continuation", c.ista.continuation}}}};
}

/// Resolved config. with_run_settings=false omits out_dir and workers, which are not part
/// of the experiment definition (keeps outputs byte-identical across directories).
inline json to_json(const ExperimentConfig& c, bool with_run_settings = true) {
    json j = {{"dataset", to_json(c.dataset)},
              {"agent", c.agent},
              {"hidden_actor", c.hidden_actor},
              {"hidden_critic", c.hidden_critic},
              {"hidden_qnet", c.hidden_qnet},
              {"steps", c.steps},
              {"acquisitions_per_step", c.acquisitions_per_step},
              {"score_k", {c.score.k1, c.score.k2, c.score.k3, c.score.k4, c.score.k5, c.score.k6}},
              {"codec", to_json(c.codec)},
              {"epsilon", detail::schedule_json(c.epsilon)},
              {"noise", detail::schedule_json(c.noise)},
              {"gamma", c.gamma},
              {"eta", c.eta},
              {"lambda", c.lambda},
              {"ridge", c.ridge},
              {"update_period", c.update_period},
              {"action_set", c.action_set},
              {"action_bounds", {c.action_min, c.action_max}},
              {"seeds", c.seeds},
              {"eval_interval", c.eval_interval},
              {"bench_repetitions", c.bench_repetitions}};
    if (with_run_settings) {
        j["workers"] = c.workers;
        j["out_dir"] = c.out_dir;
    }
    return j;
}

/// Overlays the keys present in j onto base. Unknown keys are rejected.
inline ExperimentConfig config_from_json(const json& j, ExperimentConfig cfg = {}) {
    using detail::read;
    detail::reject_unknown(j,
                           {"dataset", "agent", "hidden_actor", "hidden_critic", "hidden_qnet", "steps",
                            "acquisitions_per_step", "score_k", "codec", "epsilon", "noise", "gamma", "eta", "lambda",
                            "ridge", "update_period", "action_set", "action_bounds", "seeds", "eval_interval",
                            "bench_repetitions", "workers", "out_dir"},
                           "config");
    if (j.contains("dataset")) {
        const auto& d = j.at("dataset");
        detail::reject_unknown(d, {"kind", "n", "k", "count", "seed", "side", "downscale", "path"}, "dataset");
        read(d, "kind", cfg.dataset.kind);
        read(d, "n", cfg.dataset.n);
        read(d, "k", cfg.dataset.k);
        read(d, "count", cfg.dataset.count);
        read(d, "seed", cfg.dataset.seed);
        read(d, "side", cfg.dataset.side);
        read(d, "downscale", cfg.dataset.downscale);
        read(d, "path", cfg.dataset.path);
    }
    read(j, "agent", cfg.agent);
    read(j, "hidden_actor", cfg.hidden_actor);
    read(j, "hidden_critic", cfg.hidden_critic);
    read(j, "hidden_qnet", cfg.hidden_qnet);
    read(j, "steps", cfg.steps);
    read(j, "acquisitions_per_step", cfg.acquisitions_per_step);
    if (j.contains("score_k")) {
        std::vector<double> k;
        read(j, "score_k", k);
        if (k.size() != 6) throw ConfigError("invalid config: score_k needs exactly six values");
        cfg.score = {k[0], k[1], k[2], k[3], k[4], k[5]};
    }
    if (j.contains("codec")) {
        const auto& c = j.at("codec");
        detail::reject_unknown(c, {"basis", "solver", "master_seed", "ista"}, "codec");
        try {
            if (c.contains("basis")) cfg.codec.basis = cs::basis_from_string(c.at("basis").get<std::string>());
            if (c.contains("solver")) cfg.codec.solver = cs::solver_from_string(c.at("solver").get<std::string>());
        } catch (const std::exception& e) {
            throw ConfigError(std::string("invalid config: ") + e.what());
        }
        read(c, "master_seed", cfg.codec.master_seed);
        if (c.contains("ista")) {
            const auto& i = c.at("ista");
            detail::reject_unknown(i, {"max_iters", "lambda", "tol", "accelerated", "continuation"}, "codec.ista");
            read(i, "max_iters", cfg.codec.ista.max_iters);
            read(i, "lambda", cfg.codec.ista.lambda);
            read(i, "tol", cfg.codec.ista.tol);
            read(i, "accelerated", cfg.codec.ista.accelerated);
            read(i, "continuation", cfg.codec.ista.continuation);
        }
    }
    detail::read_schedule(j, "epsilon", cfg.epsilon);
    detail::read_schedule(j, "noise", cfg.noise);
    read(j, "gamma", cfg.gamma);
    read(j, "eta", cfg.eta);
    read(j, "lambda", cfg.lambda);
    read(j, "ridge", cfg.ridge);
    read(j, "update_period", cfg.update_period);
    read(j, "action_set", cfg.action_set);
    if (j.contains("action_bounds")) {
        std::vector<double> b;
        read(j, "action_bounds", b);
        if (b.size() != 2) throw ConfigError("invalid config: action_bounds needs two values");
        cfg.action_min = b[0];
        cfg.action_max = b[1];
    }
    read(j, "seeds", cfg.seeds);
    read(j, "eval_interval", cfg.eval_interval);
    read(j, "bench_repetitions", cfg.bench_repetitions);
    read(j, "workers", cfg.workers);
    read(j, "out_dir", cfg.out_dir);
    cfg.validate();
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
    if (!std::filesystem::exists(path)) throw ConfigError("config not found: " + path);
    std::ifstream in(path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("invalid config: malformed JSON: ") + e.what());
    }
    return config_from_json(j, std::move(base));
}

// ---- datasets ---------------------------------------------------------------

/// Location of the MNIST image file: $CSRL_MNIST, else data/train-images-idx3-ubyte.
inline std::string default_mnist_path() {
    if (const char* p = std::getenv("CSRL_MNIST"); p && *p) return p;
    return "data/train-images-idx3-ubyte";
}

inline env::Dataset load_dataset(const DatasetSpec& spec) {
    env::Dataset d;
    if (spec.kind == "synthetic") {
        d = env::synth_sparse(spec.n, spec.k, spec.count, spec.seed);
    } else if (spec.kind == "strokes") {
        d = env::synth_strokes(spec.side, spec.count, spec.seed);
    } else if (spec.kind == "idx" || spec.kind == "mnist") {
        d = env::load_idx(spec.path.empty() ? default_mnist_path() : spec.path, spec.count);
    } else if (spec.kind == "csv") {
        d = env::load_csv(spec.path);
        if (d.samples.size() > spec.count) d.samples.resize(spec.count);
    } else {
        throw ConfigError("invalid config: unknown dataset kind '" + spec.kind + "'");
    }
    if (spec.downscale > 1) d = env::downscale(d, spec.downscale);
    if (d.size() == 0) throw env::DatasetError("dataset is empty");
    return d;
}

inline std::string default_out_dir() {
    if (const char* p = std::getenv("CSRL_OUT_DIR"); p && *p) return p;
    return "results";
}

// ---- timing -----------------------------------------------------------------

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2) return *mid;
    return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

/// Median wall-clock milliseconds of fn() over reps calls, after a short warm-up.
inline double median_ms(const std::function<void()>& fn, std::size_t reps, std::size_t warmup = 3) {
    for (std::size_t i = 0; i < warmup; ++i) fn();
    std::vector<double> samples;
    samples.reserve(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        const auto t0 = Clock::now();
        fn();
        samples.push_back(ms_since(t0));
    }
    return median(std::move(samples));
}

// ---- experiment ---------------------------------------------------------------

struct StepTiming {
    std::size_t step = 0;
    double select_ms = 0, update_ms = 0, compress_ms = 0, recover_ms = 0;
};

struct EvalRecord {
    std::size_t step = 0;
    env::Evaluation eval;
};

struct ReplicaResult {
    std::string agent;
    std::uint64_t seed = 0;
    std::vector<EvalRecord> evaluations;
    std::vector<StepTiming> timings;
    std::size_t training_failures = 0;

    double first() const { return evaluations.empty() ? 0.0 : evaluations.front().eval.mean_reward; }
    double last() const { return evaluations.empty() ? 0.0 : evaluations.back().eval.mean_reward; }
    double max() const {
        double m = -1e300;
        for (const auto& e : evaluations) m = std::max(m, e.eval.mean_reward);
        return evaluations.empty() ? 0.0 : m;
    }
    /// Mean over the last min(10, #evaluations) evaluations.
    double mean_last10() const {
        if (evaluations.empty()) return 0.0;
        const std::size_t n = std::min<std::size_t>(10, evaluations.size());
        double s = 0.0;
        for (std::size_t i = evaluations.size() - n; i < evaluations.size(); ++i) s += evaluations[i].eval.mean_reward;
        return s / static_cast<double>(n);
    }
};

inline agents::OsqnetConfig osqnet_config(const ExperimentConfig& c, std::size_t dim, std::uint64_t seed) {
    agents::OsqnetConfig q;
    q.state_dim = static_cast<Eigen::Index>(dim);
    q.hidden = static_cast<Eigen::Index>(c.hidden_qnet);
    q.action_set = c.action_set;
    q.epsilon = c.epsilon;
    q.gamma = c.gamma;
    q.update_period = c.update_period;
    q.lambda = c.lambda;
    q.ridge = c.ridge;
    q.seed = seed;
    return q;
}

inline agents::AcOselmConfig acoselm_config(const ExperimentConfig& c, std::size_t dim, std::uint64_t seed) {
    agents::AcOselmConfig a;
    a.state_dim = static_cast<Eigen::Index>(dim);
    a.hidden_actor = static_cast<Eigen::Index>(c.hidden_actor);
    a.hidden_critic = static_cast<Eigen::Index>(c.hidden_critic);
    a.eta = c.eta;
    a.noise = c.noise;
    a.gamma = c.gamma;
    a.update_period = c.update_period;
    a.action_min = c.action_min;
    a.action_max = c.action_max;
    a.lambda = c.lambda;
    a.ridge = c.ridge;
    a.seed = seed;
    return a;
}

/// Online training loop for one agent replica. Evaluations run before training
/// (step 0) and after every eval_interval steps.
template <typename Agent>
ReplicaResult train_replica(Agent& agent, env::CompressionEnv& env, const ExperimentConfig& cfg) {
    ReplicaResult out;
    auto evaluate = [&](std::size_t step) { out.evaluations.push_back({step, env::evaluate_policy_detailed(agent, env)}); };
    if (cfg.steps == 0) return out;
    evaluate(0);

    std::size_t current = env.draw_index();
    for (std::size_t step = 1; step <= cfg.steps; ++step) {
        StepTiming timing{step};
        for (std::size_t i = 0; i < cfg.acquisitions_per_step; ++i) {
            const Vec& s = env.dataset.samples[current];

            auto t0 = Clock::now();
            const double c = env::act(agent, s, true);
            timing.select_ms += ms_since(t0);

            t0 = Clock::now();
            const auto cv = cs::compress(s, c, env.codec);
            timing.compress_ms += ms_since(t0);

            t0 = Clock::now();
            Vec x_hat;
            try {
                x_hat = cs::recover_detailed(cv, env.codec).x;
            } catch (const cs::RecoveryError&) {
                x_hat = Vec::Zero(s.size());
                ++out.training_failures;
            }
            timing.recover_ms += ms_since(t0);
            const double reward = cs::compression_score(c, cs::rmse(s, x_hat), env.score);

            const std::size_t next = env.draw_index();
            t0 = Clock::now();
            env::learn(agent, s, c, reward, env.dataset.samples[next]);
            timing.update_ms += ms_since(t0);
            current = next;
        }
        out.timings.push_back(timing);
        if (step % cfg.eval_interval == 0) evaluate(step);
    }
    return out;
}

inline ReplicaResult run_replica(const ExperimentConfig& cfg, const env::Dataset& data, const std::string& kind,
                                 std::uint64_t seed) {
    cs::CodecConfig codec = cfg.codec;
    codec.n = data.dim;
    // Both agent kinds see the same acquisition order for a given seed.
    env::CompressionEnv env(codec, cfg.score, data, derive_seed(seed, 0x53414D50ULL));
    ReplicaResult r;
    if (kind == "osqnet") {
        agents::OsqnetAgent agent(osqnet_config(cfg, data.dim, derive_seed(seed, 0x4147ULL)));
        r = train_replica(agent, env, cfg);
    } else {
        agents::AcOselmAgent agent(acoselm_config(cfg, data.dim, derive_seed(seed, 0x4147ULL)));
        r = train_replica(agent, env, cfg);
    }
    r.agent = kind;
    r.seed = seed;
    return r;
}

/// Runs jobs on up to `workers` threads; results keep job order.
template <typename Job>
auto run_parallel(std::size_t count, std::size_t workers, Job job) {
    using R = decltype(job(std::size_t{0}));
    std::vector<R> results(count);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = job(i);
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    results[i] = job(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return results;
}

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string provenance_line(const ExperimentConfig& cfg) {
    return "# config=" + to_json(cfg, false).dump();
}

inline const char* kMetricsHeader =
    "agent,seed,step,evaluation,mean_score,action_mean,action_min,action_max,failures";
inline const char* kTimingsHeader = "agent,seed,step,select_ms,update_ms,compress_ms,recover_ms";

struct ExperimentResult {
    std::vector<ReplicaResult> replicas;
    std::filesystem::path metrics_csv;
    std::filesystem::path timings_csv;
    std::filesystem::path summary_json;
    json summary;
};

inline json summarize(const ExperimentConfig& cfg, const std::vector<ReplicaResult>& replicas) {
    json per = json::array();
    json agg = json::object();
    for (const auto& kind : cfg.agent_kinds()) {
        double max_sum = 0, last10_sum = 0;
        std::size_t n = 0;
        for (const auto& r : replicas) {
            if (r.agent != kind) continue;
            max_sum += r.max();
            last10_sum += r.mean_last10();
            ++n;
        }
        agg[kind] = {{"replicas", n},
                     {"mean_max_score", n ? max_sum / n : 0.0},
                     {"mean_last10_score", n ? last10_sum / n : 0.0},
                     {"table", fmt(n ? max_sum / n : 0.0) + " / " + fmt(n ? last10_sum / n : 0.0)}};
    }
    for (const auto& r : replicas) {
        per.push_back({{"agent", r.agent},
                       {"seed", r.seed},
                       {"evaluations", r.evaluations.size()},
                       {"first_score", r.first()},
                       {"final_score", r.last()},
                       {"max_score", r.max()},
                       {"mean_last10_score", r.mean_last10()},
                       {"training_recovery_failures", r.training_failures}});
    }
    return {{"config", to_json(cfg, false)}, {"seeds", cfg.seeds}, {"replicas", per}, {"aggregate", agg}};
}

/// Trains every (agent kind, seed) replica and writes metrics.csv, timings.csv and
/// summary.json under cfg.out_dir.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const env::Dataset data = load_dataset(cfg.dataset);

    struct Job {
        std::string kind;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& kind : cfg.agent_kinds())
        for (auto seed : cfg.seeds) jobs.push_back({kind, seed});

    ExperimentResult res;
    res.replicas = run_parallel(jobs.size(), cfg.workers,
                                [&](std::size_t i) { return run_replica(cfg, data, jobs[i].kind, jobs[i].seed); });

    std::filesystem::create_directories(cfg.out_dir);
    res.metrics_csv = std::filesystem::path(cfg.out_dir) / "metrics.csv";
    res.timings_csv = std::filesystem::path(cfg.out_dir) / "timings.csv";
    res.summary_json = std::filesystem::path(cfg.out_dir) / "summary.json";

    {
        std::ofstream out(res.metrics_csv, std::ios::binary);
        out << provenance_line(cfg) << '\n' << kMetricsHeader << '\n';
        for (const auto& r : res.replicas) {
            for (std::size_t i = 0; i < r.evaluations.size(); ++i) {
                const auto& e = r.evaluations[i];
                out << r.agent << ',' << r.seed << ',' << e.step << ',' << i << ',' << fmt(e.eval.mean_reward) << ','
                    << fmt(e.eval.action_mean) << ',' << fmt(e.eval.action_min) << ',' << fmt(e.eval.action_max) << ','
                    << e.eval.failures << '\n';
            }
        }
    }
    {
        std::ofstream out(res.timings_csv, std::ios::binary);
        out << provenance_line(cfg) << '\n' << kTimingsHeader << '\n';
        for (const auto& r : res.replicas)
            for (const auto& t : r.timings)
                out << r.agent << ',' << r.seed << ',' << t.step << ',' << fmt(t.select_ms) << ',' << fmt(t.update_ms)
                    << ',' << fmt(t.compress_ms) << ',' << fmt(t.recover_ms) << '\n';
    }
    res.summary = summarize(cfg, res.replicas);
    std::ofstream(res.summary_json) << res.summary.dump(2) << '\n';
    return res;
}

// ---- score sweeps -------------------------------------------------------------

struct SweepRow {
    std::size_t sample = 0;
    double ratio = 0.0;
    std::size_t m = 0;
    double rmse = 0.0;
    double score = 0.0;
    bool converged = true;
};

inline std::vector<SweepRow> sweep_scores(const env::Dataset& data, const std::vector<double>& ratios,
                                          const ExperimentConfig& cfg) {
    for (double c : ratios)
        if (!(c > 0.0) || c > 1.0) throw std::domain_error("sweep: ratios must lie in (0, 1]");
    cs::CodecConfig codec = cfg.codec;
    codec.n = data.dim;
    const env::CompressionEnv env(codec, cfg.score, data);
    std::vector<SweepRow> rows;
    rows.reserve(data.size() * ratios.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (double c : ratios) {
            const auto r = env::env_step_detailed(env, data.samples[i], c);
            rows.push_back({i, c, r.m, r.rmse, r.reward, r.converged && !r.failed});
        }
    }
    return rows;
}

inline void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows,
                            const ExperimentConfig& cfg) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << provenance_line(cfg) << '\n' << "sample,ratio,m,rmse,score,converged\n";
    for (const auto& r : rows)
        out << r.sample << ',' << fmt(r.ratio) << ',' << r.m << ',' << fmt(r.rmse) << ',' << fmt(r.score) << ','
            << (r.converged ? 1 : 0) << '\n';
}

inline std::vector<double> default_sweep_ratios() {
    std::vector<double> r;
    for (int i = 1; i <= 20; ++i) r.push_back(i / 20.0);
    return r;
}

// ---- timing benchmark ---------------------------------------------------------

inline constexpr const char* kComplexityCompress = "O(D^2)";
inline constexpr const char* kComplexityRecover = "O(D^3)";
inline constexpr const char* kComplexityOsqnetInference = "O(|A|(D^2+k^2))";
inline constexpr const char* kComplexityAcoselmInference = "O(D^2+k^2)";
inline constexpr const char* kComplexityOsqnetUpdate = "O(n^3+nDk+nk^2)";
inline constexpr const char* kComplexityAcoselmUpdate = "O(n^3+nDk+nD^2)";

struct InferenceTiming {
    double osqnet_ms = 0.0;
    double acoselm_ms = 0.0;
    double osqnet_doubled_ms = 0.0; // Q-network with |A| doubled
    double ratio = 0.0;             // median per-round osqnet / acoselm
    double scaling = 0.0;           // median per-round doubled / base osqnet
};

inline std::vector<double> doubled_grid(const std::vector<double>& a) {
    // interleave midpoints to double |A| while staying inside (0, 1]
    std::vector<double> out;
    double prev = 0.0;
    for (double v : a) {
        out.push_back(0.5 * (prev + v));
        out.push_back(v);
        prev = v;
    }
    return out;
}

/// Greedy action-selection times on a D-dimensional state. Each round times a short
/// warm block of calls per selector, so background load affects all three alike.
inline InferenceTiming time_inference(std::size_t dim, const std::vector<double>& action_set, std::size_t hidden,
                                      std::size_t reps, std::uint64_t seed = 0) {
    ExperimentConfig cfg;
    cfg.action_set = action_set;
    cfg.hidden_qnet = cfg.hidden_actor = cfg.hidden_critic = hidden;
    agents::OsqnetAgent q(osqnet_config(cfg, dim, seed));
    agents::AcOselmAgent a(acoselm_config(cfg, dim, seed));
    cfg.action_set = doubled_grid(action_set);
    agents::OsqnetAgent q2(osqnet_config(cfg, dim, seed));
    Rng rng(seed);
    const Vec s = uniform(rng, static_cast<Eigen::Index>(dim), 1).col(0);
    volatile double sink = 0.0;
    constexpr int kBlock = 4;
    auto once = [&](auto&& fn) {
        fn();
        const auto t0 = Clock::now();
        for (int i = 0; i < kBlock; ++i) fn();
        return ms_since(t0) / kBlock;
    };
    auto tq = [&] { sink = sink + q.select(s, false); };
    auto tq2 = [&] { sink = sink + q2.select(s, false); };
    auto ta = [&] { sink = sink + a.select(s, false)(0); };
    for (int i = 0; i < 3; ++i) tq(), tq2(), ta();
    std::vector<double> vq, vq2, va, ratio, scaling;
    for (std::size_t r = 0; r < reps; ++r) {
        const double dq = once(tq), dq2 = once(tq2), da = once(ta);
        vq.push_back(dq);
        vq2.push_back(dq2);
        va.push_back(da);
        ratio.push_back(dq / std::max(da, 1e-9));
        scaling.push_back(dq2 / std::max(dq, 1e-9));
    }
    return {median(vq), median(va), median(vq2), median(ratio), median(scaling)};
}

/// Median time of the observation that triggers an update (buffer refilled each rep).
template <typename Agent>
double time_update(Agent& agent, const env::Dataset& data, std::size_t period, std::size_t reps) {
    std::size_t idx = 0;
    auto feed = [&](bool last) {
        const Vec& s = data.samples[idx % data.size()];
        const Vec& sn = data.samples[(idx + 1) % data.size()];
        ++idx;
        if (last) {
            const auto t0 = Clock::now();
            env::learn(agent, s, 0.5, 0.5, sn);
            return ms_since(t0);
        }
        env::learn(agent, s, 0.5, 0.5, sn);
        return 0.0;
    };
    // first update initializes the learner; time only the recursive path
    for (std::size_t i = 0; i < period; ++i) feed(i + 1 == period);
    std::vector<double> samples;
    for (std::size_t r = 0; r < reps; ++r) {
        for (std::size_t i = 0; i + 1 < period; ++i) feed(false);
        samples.push_back(feed(true));
    }
    return median(std::move(samples));
}

struct BenchReport {
    std::size_t dim = 0;
    std::size_t actions = 0;
    std::size_t repetitions = 0;
    double compress_ms = 0, recover_ms = 0;
    InferenceTiming inference;
    double osqnet_update_ms = 0, acoselm_update_ms = 0;

    double inference_ratio() const { return inference.ratio; }
    double update_ratio() const { return osqnet_update_ms > 0 ? acoselm_update_ms / osqnet_update_ms : 0.0; }
    double osqnet_scaling() const { return inference.scaling; }
};

inline BenchReport bench_timing(const ExperimentConfig& cfg) {
    cfg.validate();
    const env::Dataset data = load_dataset(cfg.dataset);
    BenchReport rep;
    rep.dim = data.dim;
    rep.actions = cfg.action_set.size();
    rep.repetitions = cfg.bench_repetitions;
    const std::size_t reps = cfg.bench_repetitions;
    const std::uint64_t seed = cfg.seeds.front();

    cs::CodecConfig codec = cfg.codec;
    codec.n = data.dim;
    const Vec& x = data.samples.front();
    const double c = 0.5;
    volatile double sink = 0.0;
    rep.compress_ms = median_ms([&] { sink = sink + cs::compress(x, c, codec).y(0); }, reps);
    const auto cv = cs::compress(x, c, codec);
    rep.recover_ms = median_ms(
        [&] {
            try {
                sink = sink + cs::recover(cv, codec)(0);
            } catch (const cs::RecoveryError&) {
            }
        },
        reps, 1);

    rep.inference = time_inference(data.dim, cfg.action_set, cfg.hidden_qnet, reps, seed);

    agents::OsqnetAgent q(osqnet_config(cfg, data.dim, seed));
    agents::AcOselmAgent a(acoselm_config(cfg, data.dim, seed));
    rep.osqnet_update_ms = time_update(q, data, cfg.update_period, reps);
    rep.acoselm_update_ms = time_update(a, data, cfg.update_period, reps);
    return rep;
}

inline json to_json(const BenchReport& r, const ExperimentConfig& cfg) {
    return {{"config", to_json(cfg, false)},
            {"seeds", cfg.seeds},
            {"dim", r.dim},
            {"actions", r.actions},
            {"repetitions", r.repetitions},
            {"median_ms",
             {{"compress", r.compress_ms},
              {"recover", r.recover_ms},
              {"osqnet_inference", r.inference.osqnet_ms},
              {"acoselm_inference", r.inference.acoselm_ms},
              {"osqnet_inference_doubled_actions", r.inference.osqnet_doubled_ms},
              {"osqnet_update", r.osqnet_update_ms},
              {"acoselm_update", r.acoselm_update_ms}}},
            {"inference_ratio_osqnet_over_acoselm", r.inference_ratio()},
            {"update_ratio_acoselm_over_osqnet", r.update_ratio()},
            {"osqnet_inference_scaling_doubled_actions", r.osqnet_scaling()},
            {"complexity",
             {{"compress", kComplexityCompress},
              {"recover", kComplexityRecover},
              {"osqnet_inference", kComplexityOsqnetInference},
              {"acoselm_inference", kComplexityAcoselmInference},
              {"osqnet_update", kComplexityOsqnetUpdate},
              {"acoselm_update", kComplexityAcoselmUpdate}}}};
}

} // namespace csrl::harness
