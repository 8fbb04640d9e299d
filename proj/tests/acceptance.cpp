// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <csrl/harness.hpp>

#include <cstdio>
#include <map>
#include <fstream>
#include <sstream>

using namespace csrl;
namespace fs = std::filesystem;

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kFdRelTol = 1e-4;
constexpr double kFdBudgetSeconds = 10.0;
constexpr double kSeqBatchRelTol = 1e-6;
constexpr double kSeqBatchBudgetSeconds = 5.0;
constexpr int kRecoveryMinSuccesses = 95;
constexpr double kRecoveryTol = 1e-4;
constexpr double kRecoveryBudgetSeconds = 120.0;
constexpr double kScoreTol = 1e-15;
constexpr double kSweepMinFraction = 0.8;
constexpr double kLearningMinGain = 0.05;
constexpr int kLearningMinSeeds = 8;
constexpr double kAcVsQnetMargin = 0.02;
constexpr int kAcVsQnetMinSeeds = 7;
constexpr double kLearningBudgetSeconds = 1800.0;
constexpr double kInferenceMinRatio = 5.0;
constexpr double kScalingLo = 1.6, kScalingHi = 2.6;
constexpr double kOneMinuteBudget = 60.0;

int failures = 0;

void report(int id, bool ok, const std::string& name, const std::string& detail) {
    std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
}

std::string format(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(harness::Clock::time_point t0) { return harness::ms_since(t0) / 1000.0; }

void dpg_gradient_check() {
    const auto t0 = harness::Clock::now();
    Rng rng(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        agents::AcOselmConfig c;
        c.state_dim = 1 + static_cast<Eigen::Index>(rng.index(10));
        c.hidden_actor = 1 + static_cast<Eigen::Index>(rng.index(20));
        c.hidden_critic = 1 + static_cast<Eigen::Index>(rng.index(20));
        c.action_dim = 1 + static_cast<Eigen::Index>(rng.index(3));
        c.seed = static_cast<std::uint64_t>(trial);
        agents::AcOselmAgent ag(c);
        auto& cp = ag.critic().params;
        cp.alpha = uniform(rng, cp.alpha.rows(), cp.alpha.cols(), -1.0, 1.0);
        cp.b = uniform(rng, cp.b.size(), 1, -1.0, 1.0).col(0);
        cp.beta = gaussian(rng, cp.beta.rows(), 1);
        ag.actor().beta = gaussian(rng, c.hidden_actor, c.action_dim);
        const Vec s = uniform(rng, c.state_dim, 1).col(0);

        const Mat g = ag.dpg_gradient(s);
        Mat fd(g.rows(), g.cols());
        for (Eigen::Index i = 0; i < g.rows(); ++i)
            for (Eigen::Index j = 0; j < g.cols(); ++j) {
                double& b = ag.actor().beta(i, j);
                const double b0 = b;
                b = b0 + kFdStep;
                const double up = ag.critic_forward(s, ag.actor_forward(s));
                b = b0 - kFdStep;
                const double dn = ag.critic_forward(s, ag.actor_forward(s));
                b = b0;
                fd(i, j) = (up - dn) / (2 * kFdStep);
            }
        const double denom = std::max(fd.norm(), 1e-12);
        worst = std::max(worst, (g - fd).norm() / denom);
    }
    const double secs = seconds_since(t0);
    report(1, worst < kFdRelTol && secs < kFdBudgetSeconds, "actor gradient vs central differences",
           format("max rel err %.3g over 100 configs (tol %.0e), %.2f s", worst, kFdRelTol, secs));
}

Mat ridge_solution(const Mat& H, const Mat& Y, double ridge) {
    const Eigen::Index m = H.cols();
    Mat A(H.rows() + m, m);
    A << H, std::sqrt(ridge) * Mat::Identity(m, m);
    Mat B = Mat::Zero(H.rows() + m, Y.cols());
    B.topRows(H.rows()) = Y;
    return A.colPivHouseholderQr().solve(B);
}

void sequential_equals_batch() {
    const auto t0 = harness::Clock::now();
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(derive_seed(seed, 0x5EB));
        const auto hidden = static_cast<Eigen::Index>(5 + rng.index(46)); // 5..50
        const Eigen::Index in = 1 + static_cast<Eigen::Index>(rng.index(8));
        auto st = elm::make_state(elm::make_params(rng, in, hidden, 1, -1.0, 1.0), 1.0);
        const Mat X = gaussian(rng, 200, in), Y = gaussian(rng, 200, 1);
        const double ridge = 1e-8;
        elm::oselm_init(st, X.topRows(20), Y.topRows(20), ridge);
        for (Eigen::Index c = 1; c < 10; ++c) elm::oselm_update(st, X.middleRows(20 * c, 20), Y.middleRows(20 * c, 20));
        const Mat ref = ridge_solution(elm::hidden(st.params, X), Y, ridge);
        worst = std::max(worst, (st.params.beta - ref).norm() / ref.norm());
    }
    const double secs = seconds_since(t0);
    report(2, worst < kSeqBatchRelTol && secs < kSeqBatchBudgetSeconds, "sequential updates equal batch fit",
           format("max rel err %.3g over 20 seeds (tol %.0e), %.2f s", worst, kSeqBatchRelTol, secs));
}

void sparse_recovery() {
    const auto t0 = harness::Clock::now();
    cs::CodecConfig codec;
    codec.n = 64;
    codec.solver = cs::Solver::lp;
    const auto data = env::synth_sparse(64, 4, 100, 7);
    int ok = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        codec.master_seed = i;
        const auto cv = cs::compress(data.samples[i], 0.5, codec);
        try {
            ok += (cs::recover(cv, codec) - data.samples[i]).cwiseAbs().maxCoeff() < kRecoveryTol;
        } catch (const cs::RecoveryError&) {
        }
    }
    const double secs = seconds_since(t0);
    report(3, ok >= kRecoveryMinSuccesses && secs < kRecoveryBudgetSeconds, "exact sparse recovery (n=64, k=4, m=32)",
           format("%d/100 recovered (need %d), %.2f s", ok, kRecoveryMinSuccesses, secs));
}

void score_values() {
    bool ok = cs::compression_score(0.5, 0.0, {}) == 0.875;
    double worst = 0.0;
    for (int i = 1; i <= 100; ++i) {
        const double c = i / 100.0;
        worst = std::max(worst, std::abs(cs::compression_score(c, 0.0, {}) - (1.0 - c * c * c)));
    }
    ok = ok && worst <= kScoreTol;
    report(4, ok, "score at zero error", format("E(0.5,0)=%.17g, max |E(c,0)-(1-c^3)|=%.3g",
                                                 cs::compression_score(0.5, 0.0, {}), worst));
}

void sweep_shape() {
    harness::ExperimentConfig cfg;
    cfg.codec.solver = cs::Solver::lp;
    const auto data = env::downscale(env::synth_strokes(32, 100, 0), 4);
    const std::vector<double> ratios{0.25, 0.4, 0.5, 0.6, 0.7, 0.9};
    const auto rows = harness::sweep_scores(data, ratios, cfg);
    std::size_t ok = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto* r = &rows[i * ratios.size()];
        const double mid = std::max({r[1].score, r[2].score, r[3].score, r[4].score});
        ok += mid > r[0].score && mid > r[5].score;
    }
    const double frac = static_cast<double>(ok) / static_cast<double>(data.size());
    report(5, frac >= kSweepMinFraction, "interior ratio beats 0.25 and 0.9 on 8x8 images",
           format("%zu/%zu samples (need %.0f%%)", ok, data.size(), 100 * kSweepMinFraction));
}

void learning_curves() {
    const auto t0 = harness::Clock::now();
    harness::ExperimentConfig cfg;
    cfg.seeds.clear();
    for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(s);
    cfg.out_dir = (fs::temp_directory_path() / "csrl_acceptance" / "learning").string();
    const auto res = harness::run_experiment(cfg);
    const double secs = seconds_since(t0);

    int gain_q = 0, gain_ac = 0, close = 0;
    std::map<std::uint64_t, double> q_last, ac_last;
    for (const auto& r : res.replicas) {
        const bool gained = r.last() - r.first() >= kLearningMinGain;
        (r.agent == "osqnet" ? gain_q : gain_ac) += gained;
        (r.agent == "osqnet" ? q_last : ac_last)[r.seed] = r.mean_last10();
    }
    for (const auto& [seed, q] : q_last) close += ac_last.at(seed) >= q - kAcVsQnetMargin;
    report(6, gain_q >= kLearningMinSeeds && gain_ac >= kLearningMinSeeds && secs < kLearningBudgetSeconds,
           "both agents improve over training",
           format("gain >= %.2f in %d/10 (osqnet), %d/10 (acoselm); %.0f s", kLearningMinGain, gain_q, gain_ac, secs));
    report(6, close >= kAcVsQnetMinSeeds, "actor-critic keeps pace with Q-network",
           format("acoselm last-10 mean >= osqnet - %.2f in %d/10 seeds (need %d)", kAcVsQnetMargin, close,
                  kAcVsQnetMinSeeds));
}

void inference_cost() {
    const auto t0 = harness::Clock::now();
    const auto grid = agents::default_action_grid();
    const auto t = harness::time_inference(784, grid, 400, 300);
    const double ratio = t.ratio;
    const double scaling = t.scaling;
    const double secs = seconds_since(t0);
    report(7, ratio >= kInferenceMinRatio && scaling >= kScalingLo && scaling <= kScalingHi && secs < kOneMinuteBudget,
           "Q-network inference cost grows with |A|",
           format("osqnet/acoselm %.2fx (need >= %.0f), doubling |A| scales osqnet by %.2fx (need [%.1f, %.1f]), %.1f s",
                  ratio, kInferenceMinRatio, scaling, kScalingLo, kScalingHi, secs));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void determinism() {
    const auto t0 = harness::Clock::now();
    harness::ExperimentConfig cfg;
    cfg.seeds = {3, 4};
    cfg.steps = 30;
    const auto root = fs::temp_directory_path() / "csrl_acceptance";
    cfg.out_dir = (root / "det_a").string();
    const auto a = slurp(harness::run_experiment(cfg).metrics_csv);
    cfg.out_dir = (root / "det_b").string();
    const auto b = slurp(harness::run_experiment(cfg).metrics_csv);
    const double secs = seconds_since(t0);
    report(8, !a.empty() && a == b && secs < kOneMinuteBudget, "byte-identical metrics across runs",
           format("%zu bytes, %s, %.1f s", a.size(), a == b ? "identical" : "differ", secs));
}

} // namespace

int main() {
    dpg_gradient_check();
    sequential_equals_batch();
    sparse_recovery();
    score_values();
    sweep_shape();
    inference_cost();
    determinism();
    learning_curves();
    std::printf("%s: %d criterion check(s) failed\n", failures ? "FAILED" : "OK", failures);
    return failures ? 1 : 0;
}
