#pragma once

// Online reinforcement-learning agents for compression-ratio selection:
//   OsqnetAgent  - Q-learning over a discrete action grid with an OS-ELM Q-function.
//   AcOselmAgent - actor-critic; OS-ELM critic, actor output weights trained by the
//                  analytic deterministic policy gradient.
// Both store transitions in a buffer that is consumed and cleared every N observations.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "elm.hpp"
#include "numerics.hpp"
#include "serialize.hpp"

namespace csrl::agents {

struct Transition {
    Vec s;
    Vec a;
    double r = 0.0; // bootstrapped target
    Vec s_next;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity = 10) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be >= 1");
        items_.reserve(capacity);
    }

    void push(Transition t) { items_.push_back(std::move(t)); }
    void clear() { items_.clear(); }
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool full() const { return items_.size() >= capacity_; }
    bool empty() const { return items_.empty(); }
    const std::vector<Transition>& items() const { return items_; }

    /// Stacks concat(s, a) rows and target column for an ELM update.
    std::pair<Mat, Mat> design() const {
        if (items_.empty()) return {Mat(), Mat()};
        const auto D = items_.front().s.size(), k = items_.front().a.size();
        Mat X(static_cast<Eigen::Index>(items_.size()), D + k);
        Mat R(static_cast<Eigen::Index>(items_.size()), 1);
        for (std::size_t i = 0; i < items_.size(); ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            X.row(row).head(D) = items_[i].s.transpose();
            X.row(row).tail(k) = items_[i].a.transpose();
            R(row, 0) = items_[i].r;
        }
        return {X, R};
    }

private:
    std::size_t capacity_;
    std::vector<Transition> items_;
};

/// value(t) = max(floor, start * exp(-t / tau)).
struct DecaySchedule {
    double start = 1.0;
    double floor = 0.01;
    double tau = 2000.0;

    double at(std::size_t t) const { return std::max(floor, start * std::exp(-static_cast<double>(t) / tau)); }
};

inline std::string rng_state(Rng& rng) {
    std::ostringstream os;
    os << rng.engine();
    return os.str();
}

inline void restore_rng_state(Rng& rng, const std::string& state) {
    std::istringstream is(state);
    is >> rng.engine();
}

inline std::vector<double> default_action_grid() {
    std::vector<double> a;
    for (int i = 1; i <= 10; ++i) a.push_back(i / 10.0);
    return a;
}

struct OsqnetConfig {
    Eigen::Index state_dim = 64;
    Eigen::Index hidden = 400;
    std::vector<double> action_set = default_action_grid();
    DecaySchedule epsilon{1.0, 0.01, 2000.0};
    double gamma = 0.0;
    std::size_t update_period = 10;
    double lambda = 1.0;
    double ridge = 1e-3;
    std::uint64_t seed = 0;
};

class OsqnetAgent {
public:
    explicit OsqnetAgent(const OsqnetConfig& cfg)
        : cfg_(cfg), rng_(derive_seed(cfg.seed, 0x51ULL)), buffer_(cfg.update_period) {
        if (cfg.action_set.empty()) throw std::invalid_argument("osqnet: action set must be nonempty");
        auto sorted = cfg.action_set;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("osqnet: action set values must be distinct");
        if (cfg.gamma < 0.0 || cfg.gamma > 1.0) throw std::invalid_argument("osqnet: gamma must lie in [0, 1]");
        Rng init(derive_seed(cfg.seed, 0x51A17ULL));
        qnet_ = elm::make_state(elm::make_params(init, cfg.state_dim + 1, cfg.hidden, 1), cfg.lambda);
    }

    const OsqnetConfig& config() const { return cfg_; }
    elm::OselmState& qnet() { return qnet_; }
    const elm::OselmState& qnet() const { return qnet_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    std::size_t steps() const { return t_; }
    double epsilon() const { return cfg_.epsilon.at(t_); }

    double q_value(const Vec& s, double a) const {
        require_dims(s.size() == cfg_.state_dim, "q_value: state dim");
        Mat x(1, cfg_.state_dim + 1);
        x.row(0).head(cfg_.state_dim) = s.transpose();
        x(0, cfg_.state_dim) = a;
        return elm::predict(qnet_.params, x)(0, 0);
    }

    /// Q(s, a) for every a in the action set; one forward pass per action.
    Vec q_values(const Vec& s) const {
        require_dims(s.size() == cfg_.state_dim, "q_values: state dim");
        const auto A = static_cast<Eigen::Index>(cfg_.action_set.size());
        Mat X(A, cfg_.state_dim + 1);
        for (Eigen::Index i = 0; i < A; ++i) {
            X.row(i).head(cfg_.state_dim) = s.transpose();
            X(i, cfg_.state_dim) = cfg_.action_set[static_cast<std::size_t>(i)];
        }
        return elm::predict(qnet_.params, X).col(0);
    }

    /// Index of the best action; ties go to the lowest action value.
    std::size_t greedy_index(const Vec& s) const {
        const Vec q = q_values(s);
        std::size_t best = 0;
        for (Eigen::Index i = 1; i < q.size(); ++i) {
            const auto b = static_cast<Eigen::Index>(best);
            const auto u = static_cast<std::size_t>(i);
            if (q(i) > q(b) || (q(i) == q(b) && cfg_.action_set[u] < cfg_.action_set[best])) best = u;
        }
        return best;
    }

    double select(const Vec& s, bool explore) {
        if (explore && rng_.uniform() < epsilon()) return cfg_.action_set[rng_.index(cfg_.action_set.size())];
        return cfg_.action_set[greedy_index(s)];
    }

    double bootstrap_target(double r_env, const Vec& s_next) const {
        if (cfg_.gamma == 0.0) return r_env;
        return r_env + cfg_.gamma * q_values(s_next).maxCoeff();
    }

    /// Stores the bootstrapped transition; updates and clears the buffer every N observations.
    Transition observe(const Vec& s, double a, double r_env, const Vec& s_next) {
        Transition tr{s, Vec::Constant(1, a), bootstrap_target(r_env, s_next), s_next};
        buffer_.push(tr);
        ++t_;
        if (t_ % cfg_.update_period == 0) update();
        return tr;
    }

    /// Consumes a full buffer: first call initializes the OS-ELM, later calls update it.
    /// A buffer shorter than N is left untouched.
    bool update() {
        if (!buffer_.full()) return false;
        const auto [X, R] = buffer_.design();
        if (!qnet_.initialized)
            elm::oselm_init(qnet_, X, R, cfg_.ridge);
        else
            elm::oselm_update(qnet_, X, R);
        buffer_.clear();
        return true;
    }

    json to_json() {
        return {{"kind", "osqnet"},
                {"state_dim", cfg_.state_dim},
                {"hidden", cfg_.hidden},
                {"action_set", cfg_.action_set},
                {"gamma", cfg_.gamma},
                {"update_period", cfg_.update_period},
                {"ridge", cfg_.ridge},
                {"seed", cfg_.seed},
                {"epsilon", {{"start", cfg_.epsilon.start}, {"floor", cfg_.epsilon.floor}, {"tau", cfg_.epsilon.tau}}},
                {"t", t_},
                {"qnet", elm::to_json(qnet_)},
                {"buffer", buffer_json()},
                {"rng", rng_state(rng_)}};
    }

    static OsqnetAgent from_json(const json& j) {
        OsqnetConfig cfg;
        cfg.state_dim = j.at("state_dim").get<Eigen::Index>();
        cfg.hidden = j.at("hidden").get<Eigen::Index>();
        cfg.action_set = j.at("action_set").get<std::vector<double>>();
        cfg.gamma = j.at("gamma").get<double>();
        cfg.update_period = j.at("update_period").get<std::size_t>();
        cfg.ridge = j.at("ridge").get<double>();
        cfg.seed = j.at("seed").get<std::uint64_t>();
        const auto& e = j.at("epsilon");
        cfg.epsilon = {e.at("start").get<double>(), e.at("floor").get<double>(), e.at("tau").get<double>()};
        OsqnetAgent agent(cfg);
        agent.qnet_ = elm::state_from_json(j.at("qnet"));
        cfg.lambda = agent.qnet_.lambda;
        agent.cfg_.lambda = cfg.lambda;
        agent.t_ = j.at("t").get<std::size_t>();
        agent.load_buffer(j.at("buffer"));
        restore_rng_state(agent.rng_, j.at("rng").get<std::string>());
        return agent;
    }

private:
    json buffer_json() const {
        json arr = json::array();
        for (const auto& tr : buffer_.items())
            arr.push_back({{"s", vec_to_json(tr.s)}, {"a", vec_to_json(tr.a)}, {"r", tr.r}, {"s_next", vec_to_json(tr.s_next)}});
        return arr;
    }
    void load_buffer(const json& arr) {
        buffer_.clear();
        for (const auto& e : arr)
            buffer_.push({vec_from_json(e.at("s")), vec_from_json(e.at("a")), e.at("r").get<double>(),
                          vec_from_json(e.at("s_next"))});
    }

    OsqnetConfig cfg_;
    Rng rng_;
    elm::OselmState qnet_;
    ReplayBuffer buffer_;
    std::size_t t_ = 0;
};

struct AcOselmConfig {
    Eigen::Index state_dim = 64;
    Eigen::Index action_dim = 1;
    Eigen::Index hidden_actor = 400;
    Eigen::Index hidden_critic = 400;
    double eta = 0.05;
    DecaySchedule noise{0.3, 0.01, 2000.0};
    double gamma = 0.0;
    std::size_t update_period = 10;
    double action_min = 0.01;
    double action_max = 1.0;
    double lambda = 1.0;
    double ridge = 1e-3;
    std::uint64_t seed = 0;
};

struct Actor {
    Mat alpha; // D x m_a
    Vec b;     // m_a
    Mat beta;  // m_a x k
    Activation hidden_activation = Activation::sigmoid;
    Activation output_activation = Activation::sigmoid;
};

class AcOselmAgent {
public:
    explicit AcOselmAgent(const AcOselmConfig& cfg)
        : cfg_(cfg), rng_(derive_seed(cfg.seed, 0xACULL)), buffer_(cfg.update_period) {
        if (!(cfg.eta >= 0.0)) throw std::invalid_argument("acoselm: eta must be >= 0");
        if (cfg.gamma < 0.0 || cfg.gamma > 1.0) throw std::invalid_argument("acoselm: gamma must lie in [0, 1]");
        if (!(cfg.action_min < cfg.action_max)) throw std::invalid_argument("acoselm: empty action range");
        Rng init(derive_seed(cfg.seed, 0xAC17ULL));
        actor_.alpha = uniform(init, cfg.state_dim, cfg.hidden_actor);
        actor_.b = uniform(init, cfg.hidden_actor, 1).col(0);
        actor_.beta = Mat::Zero(cfg.hidden_actor, cfg.action_dim);
        critic_ = elm::make_state(elm::make_params(init, cfg.state_dim + cfg.action_dim, cfg.hidden_critic, 1),
                                  cfg.lambda);
    }

    const AcOselmConfig& config() const { return cfg_; }
    Actor& actor() { return actor_; }
    const Actor& actor() const { return actor_; }
    elm::OselmState& critic() { return critic_; }
    const elm::OselmState& critic() const { return critic_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    std::size_t steps() const { return t_; }
    double noise_sigma() const { return cfg_.noise.at(t_); }

    RowVec actor_hidden(const Vec& s) const {
        require_dims(s.size() == cfg_.state_dim, "actor: state dim");
        const RowVec z = s.transpose() * actor_.alpha + actor_.b.transpose();
        return activate(actor_.hidden_activation, z);
    }

    /// mu(s) = g_ao(g_ah(s alpha_a + b_a) beta_a).
    Vec actor_forward(const Vec& s) const {
        const RowVec z = actor_hidden(s) * actor_.beta;
        return activate(actor_.output_activation, z).transpose();
    }

    /// Q(s, a) = g_ch((s a) alpha_c + b_c) beta_c.
    double critic_forward(const Vec& s, const Vec& a) const {
        require_dims(s.size() == cfg_.state_dim && a.size() == cfg_.action_dim, "critic: input dims");
        return elm::predict(critic_.params, concat(s, a).transpose())(0, 0);
    }

    Vec select(const Vec& s, bool explore) {
        Vec a = actor_forward(s);
        if (explore) {
            const double sigma = noise_sigma();
            for (Eigen::Index i = 0; i < a.size(); ++i) a(i) += sigma * rng_.normal();
        }
        return a.cwiseMax(cfg_.action_min).cwiseMin(cfg_.action_max);
    }

    /// dQ(s, mu(s)) / d beta_a, with critic and actor hidden layer held fixed:
    ///   h_a^T [ g'_ao(h_a beta_a) (.) ( g'_ch(x alpha_c + b_c) (beta_c (.) alpha_ck^T) ) ]
    /// where x = (s mu(s)) and alpha_ck are the action rows of alpha_c.
    Mat dpg_gradient(const Vec& s) const {
        const RowVec h_a = actor_hidden(s);
        const RowVec z_out = h_a * actor_.beta;
        const RowVec out_slope = activate_derivative(actor_.output_activation, z_out);
        const Vec a = activate(actor_.output_activation, z_out).transpose();

        const auto& cp = critic_.params;
        RowVec z_c = concat(s, a).transpose() * cp.alpha;
        z_c += cp.b.transpose();
        const RowVec hidden_slope = activate_derivative(cp.hidden_activation, z_c);
        const auto alpha_ck = cp.alpha.bottomRows(cfg_.action_dim); // k x m_c
        const RowVec dq_da = hidden_slope.cwiseProduct(cp.beta.col(0).transpose()) * alpha_ck.transpose();

        return h_a.transpose() * out_slope.cwiseProduct(dq_da);
    }

    double bootstrap_target(double r_env, const Vec& s_next) const {
        if (cfg_.gamma == 0.0) return r_env;
        return r_env + cfg_.gamma * critic_forward(s_next, actor_forward(s_next));
    }

    Transition observe(const Vec& s, const Vec& a, double r_env, const Vec& s_next) {
        require_dims(a.size() == cfg_.action_dim, "observe: action dim");
        Transition tr{s, a, bootstrap_target(r_env, s_next), s_next};
        buffer_.push(tr);
        ++t_;
        if (t_ % cfg_.update_period == 0) update();
        return tr;
    }

    /// Critic OS-ELM step on the buffer, then one DPG ascent step on beta_a using the
    /// updated critic. A buffer shorter than N is left untouched.
    bool update() {
        if (!buffer_.full()) return false;
        const auto [X, R] = buffer_.design();
        if (!critic_.initialized)
            elm::oselm_init(critic_, X, R, cfg_.ridge);
        else
            elm::oselm_update(critic_, X, R);

        if (cfg_.eta > 0.0) {
            Mat grad = Mat::Zero(actor_.beta.rows(), actor_.beta.cols());
            for (const auto& tr : buffer_.items()) grad += dpg_gradient(tr.s);
            grad /= static_cast<double>(buffer_.size());
            actor_.beta += cfg_.eta * grad;
        }
        buffer_.clear();
        return true;
    }

    json to_json() {
        json tr = json::array();
        for (const auto& t : buffer_.items())
            tr.push_back({{"s", vec_to_json(t.s)}, {"a", vec_to_json(t.a)}, {"r", t.r}, {"s_next", vec_to_json(t.s_next)}});
        return {{"kind", "acoselm"},
                {"state_dim", cfg_.state_dim},
                {"action_dim", cfg_.action_dim},
                {"hidden_actor", cfg_.hidden_actor},
                {"hidden_critic", cfg_.hidden_critic},
                {"eta", cfg_.eta},
                {"noise", {{"start", cfg_.noise.start}, {"floor", cfg_.noise.floor}, {"tau", cfg_.noise.tau}}},
                {"gamma", cfg_.gamma},
                {"update_period", cfg_.update_period},
                {"action_bounds", {cfg_.action_min, cfg_.action_max}},
                {"ridge", cfg_.ridge},
                {"seed", cfg_.seed},
                {"t", t_},
                {"actor",
                 {{"alpha", mat_to_json(actor_.alpha)},
                  {"b", vec_to_json(actor_.b)},
                  {"beta", mat_to_json(actor_.beta)},
                  {"hidden_activation", to_string(actor_.hidden_activation)},
                  {"output_activation", to_string(actor_.output_activation)}}},
                {"critic", elm::to_json(critic_)},
                {"buffer", tr},
                {"rng", rng_state(rng_)}};
    }

    static AcOselmAgent from_json(const json& j) {
        AcOselmConfig cfg;
        cfg.state_dim = j.at("state_dim").get<Eigen::Index>();
        cfg.action_dim = j.at("action_dim").get<Eigen::Index>();
        cfg.hidden_actor = j.at("hidden_actor").get<Eigen::Index>();
        cfg.hidden_critic = j.at("hidden_critic").get<Eigen::Index>();
        cfg.eta = j.at("eta").get<double>();
        const auto& nz = j.at("noise");
        cfg.noise = {nz.at("start").get<double>(), nz.at("floor").get<double>(), nz.at("tau").get<double>()};
        cfg.gamma = j.at("gamma").get<double>();
        cfg.update_period = j.at("update_period").get<std::size_t>();
        const auto bounds = j.at("action_bounds").get<std::vector<double>>();
        if (bounds.size() != 2) throw std::invalid_argument("acoselm json: action_bounds needs two values");
        cfg.action_min = bounds[0];
        cfg.action_max = bounds[1];
        cfg.ridge = j.at("ridge").get<double>();
        cfg.seed = j.at("seed").get<std::uint64_t>();
        AcOselmAgent agent(cfg);
        const auto& a = j.at("actor");
        agent.actor_.alpha = mat_from_json(a.at("alpha"));
        agent.actor_.b = vec_from_json(a.at("b"));
        agent.actor_.beta = mat_from_json(a.at("beta"));
        agent.actor_.hidden_activation = activation_from_string(a.at("hidden_activation").get<std::string>());
        agent.actor_.output_activation = activation_from_string(a.at("output_activation").get<std::string>());
        agent.critic_ = elm::state_from_json(j.at("critic"));
        agent.cfg_.lambda = agent.critic_.lambda;
        agent.t_ = j.at("t").get<std::size_t>();
        for (const auto& e : j.at("buffer"))
            agent.buffer_.push({vec_from_json(e.at("s")), vec_from_json(e.at("a")), e.at("r").get<double>(),
                                vec_from_json(e.at("s_next"))});
        restore_rng_state(agent.rng_, j.at("rng").get<std::string>());
        return agent;
    }

private:
    AcOselmConfig cfg_;
    Rng rng_;
    Actor actor_;
    elm::OselmState critic_;
    ReplayBuffer buffer_;
    std::size_t t_ = 0;
};

} // namespace csrl::agents
