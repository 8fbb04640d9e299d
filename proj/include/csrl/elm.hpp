#pragma once

// Single-hidden-layer extreme learning machine: random frozen input weights,
// output weights fitted analytically (batch) or recursively (OS-ELM).

#include <stdexcept>

#include "numerics.hpp"
#include "serialize.hpp"

namespace csrl::elm {

struct ElmParams {
    Mat alpha; // input_dim x hidden_dim
    Vec b;     // hidden_dim
    Mat beta;  // hidden_dim x out_dim
    Activation hidden_activation = Activation::sigmoid;

    Eigen::Index input_dim() const { return alpha.rows(); }
    Eigen::Index hidden_dim() const { return alpha.cols(); }
    Eigen::Index out_dim() const { return beta.cols(); }
};

/// alpha, b ~ U[lo, hi); beta = 0.
inline ElmParams make_params(Rng& rng, Eigen::Index input_dim, Eigen::Index hidden_dim, Eigen::Index out_dim,
                             double lo = 0.0, double hi = 1.0, Activation act = Activation::sigmoid) {
    if (input_dim < 1 || hidden_dim < 1 || out_dim < 1) throw std::invalid_argument("elm: dimensions must be >= 1");
    ElmParams p;
    p.alpha = uniform(rng, input_dim, hidden_dim, lo, hi);
    p.b = uniform(rng, hidden_dim, 1, lo, hi).col(0);
    p.beta = Mat::Zero(hidden_dim, out_dim);
    p.hidden_activation = act;
    return p;
}

/// H = g(X alpha + b), one row per sample.
inline Mat hidden(const ElmParams& p, const Mat& X) {
    require_dims(X.cols() == p.input_dim(), "hidden: X width must equal input_dim");
    Mat Z = X * p.alpha;
    Z.rowwise() += p.b.transpose();
    return activate(p.hidden_activation, Z);
}

inline Mat predict(const ElmParams& p, const Mat& X) { return hidden(p, X) * p.beta; }

/// beta = (H^T H + ridge I)^{-1} H^T Y. With ridge = 0 this is the least-squares
/// pseudo-inverse solution and throws SingularMatrixError if H lacks full column rank.
inline Mat fit_batch(const ElmParams& p, const Mat& X, const Mat& Y, double ridge) {
    require_dims(X.rows() == Y.rows() && X.rows() >= 1, "fit_batch: X and Y row counts");
    if (ridge < 0.0) throw std::invalid_argument("fit_batch: ridge must be >= 0");
    const Mat H = hidden(p, X);
    Mat G = H.transpose() * H;
    G.diagonal().array() += ridge;
    return solve(G, H.transpose() * Y);
}

struct OselmState {
    ElmParams params;
    Mat P;
    double lambda = 1.0; // forgetting rate
    bool initialized = false;
};

inline OselmState make_state(ElmParams params, double lambda = 1.0) {
    if (!(lambda > 0.0)) throw std::invalid_argument("oselm: lambda must be > 0");
    return {std::move(params), Mat(), lambda, false};
}

inline void symmetrize(Mat& P) { P = 0.5 * (P + P.transpose()).eval(); }

/// P0 = (H0^T H0 + ridge I)^{-1}, beta0 = P0 H0^T Y0.
inline void oselm_init(OselmState& s, const Mat& X0, const Mat& Y0, double ridge) {
    require_dims(X0.rows() >= 1 && X0.rows() == Y0.rows(), "oselm_init: X0 and Y0 row counts");
    require_dims(Y0.cols() == s.params.out_dim(), "oselm_init: Y0 width must equal out_dim");
    if (!(ridge > 0.0)) throw std::invalid_argument("oselm_init: ridge must be > 0");
    const Mat H = hidden(s.params, X0);
    Mat G = H.transpose() * H;
    G.diagonal().array() += ridge;
    s.P = solve_spd(G, Mat::Identity(G.rows(), G.cols()));
    symmetrize(s.P);
    s.params.beta = s.P * (H.transpose() * Y0);
    s.initialized = true;
}

/// P <- P - P H^T (lambda I + H P H^T)^{-1} H P;  beta <- beta + P H^T (Y - H beta).
/// With K = P_old H^T S^{-1}, the new P satisfies P H^T = lambda K; the beta step uses
/// that form, which avoids multiplying by the freshly cancelled P.
inline void oselm_update(OselmState& s, const Mat& X, const Mat& Y) {
    if (!s.initialized) throw std::logic_error("oselm_update: state not initialized");
    require_dims(X.rows() == Y.rows() && Y.cols() == s.params.out_dim(), "oselm_update: X/Y shapes");
    const Mat H = hidden(s.params, X);
    const Mat HP = H * s.P; // b x m
    Mat S = HP * H.transpose();
    S.diagonal().array() += s.lambda;
    const Mat K = solve_spd(S, HP).transpose(); // m x b
    const Mat innovation = Y - H * s.params.beta;
    s.P -= K * HP;
    symmetrize(s.P);
    s.params.beta += s.lambda * (K * innovation);
}

inline json to_json(const ElmParams& p) {
    return {{"alpha", mat_to_json(p.alpha)},
            {"b", vec_to_json(p.b)},
            {"beta", mat_to_json(p.beta)},
            {"hidden_activation", to_string(p.hidden_activation)}};
}

inline ElmParams params_from_json(const json& j) {
    ElmParams p;
    p.alpha = mat_from_json(j.at("alpha"));
    p.b = vec_from_json(j.at("b"));
    p.beta = mat_from_json(j.at("beta"));
    p.hidden_activation = activation_from_string(j.at("hidden_activation").get<std::string>());
    if (p.b.size() != p.hidden_dim() || p.beta.rows() != p.hidden_dim())
        throw std::invalid_argument("elm json: inconsistent dimensions");
    return p;
}

inline json to_json(const OselmState& s) {
    return {{"params", to_json(s.params)},
            {"P", mat_to_json(s.P)},
            {"lambda", s.lambda},
            {"initialized", s.initialized}};
}

inline OselmState state_from_json(const json& j) {
    OselmState s;
    s.params = params_from_json(j.at("params"));
    s.P = mat_from_json(j.at("P"));
    s.lambda = j.at("lambda").get<double>();
    s.initialized = j.at("initialized").get<bool>();
    return s;
}

} // namespace csrl::elm
