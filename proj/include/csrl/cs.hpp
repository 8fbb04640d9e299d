#pragma once

// Compressed-sensing codec: ratio -> measurement count, Gaussian projection,
// L1 recovery (basis pursuit LP or iterative shrinkage), and the compression score.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "lp.hpp"
#include "numerics.hpp"

namespace csrl::cs {

enum class Basis { identity, dct };
enum class Solver { lp, ista };

inline Basis basis_from_string(const std::string& s) {
    if (s == "identity") return Basis::identity;
    if (s == "dct") return Basis::dct;
    throw std::invalid_argument("unknown basis: " + s);
}
inline std::string to_string(Basis b) { return b == Basis::identity ? "identity" : "dct"; }

inline Solver solver_from_string(const std::string& s) {
    if (s == "lp") return Solver::lp;
    if (s == "ista") return Solver::ista;
    throw std::invalid_argument("unknown solver: " + s);
}
inline std::string to_string(Solver s) { return s == Solver::lp ? "lp" : "ista"; }

struct IstaParams {
    std::size_t max_iters = 5000;
    double lambda = 1e-4; // L1 weight
    double tol = 1e-7;
    bool accelerated = true;  // FISTA momentum with adaptive restart
    bool continuation = true; // geometric decrease of the L1 weight, warm-started
};

struct CodecConfig {
    std::size_t n = 64;
    Basis basis = Basis::identity;
    Solver solver = Solver::lp;
    std::uint64_t master_seed = 0;
    IstaParams ista{};

    void validate() const {
        if (n < 1) throw std::invalid_argument("codec: n must be >= 1");
        if (ista.max_iters == 0 || !(ista.lambda > 0) || !(ista.tol > 0))
            throw std::invalid_argument("codec: ista parameters must be positive");
    }
};

struct SensingMatrix {
    std::size_t m = 0;
    std::size_t n = 0;
    Mat entries;
};

struct CompressedVector {
    Vec y;
    std::size_t m = 0;
    std::size_t n = 0;
    std::uint64_t master_seed = 0;
};

struct ScoreParams {
    double k1 = 1.0, k2 = 1.0, k3 = 3.0, k4 = 1.0, k5 = 1.5, k6 = 1.0;
};

struct RecoveryResult {
    Vec x;
    bool converged = true;
    std::size_t iterations = 0;
};

class RecoveryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// m = clamp(round_half_away(c n), 1, n).
inline std::size_t ratio_to_m(double c, std::size_t n) {
    if (!(c > 0.0) || c > 1.0) throw std::domain_error("compression ratio must lie in (0, 1]");
    const double m = std::round(c * static_cast<double>(n)); // std::round rounds half away from zero
    if (m < 1.0) return 1;
    if (m > static_cast<double>(n)) return n;
    return static_cast<std::size_t>(m);
}

/// Φ with i.i.d. N(0,1) entries, reproducible from (master_seed, m, n) alone.
inline SensingMatrix derive_phi(std::uint64_t master_seed, std::size_t m, std::size_t n) {
    if (m < 1 || m > n) throw std::invalid_argument("derive_phi: need 1 <= m <= n");
    Rng rng(derive_seed(master_seed, 0x5048494ULL, m, n));
    return {m, n, gaussian(rng, static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n))};
}

/// Orthonormal DCT-II synthesis matrix: x = Psi * x_s.
inline Mat dct_basis(std::size_t n) {
    const auto N = static_cast<Eigen::Index>(n);
    Mat psi(N, N);
    for (Eigen::Index i = 0; i < N; ++i) {
        for (Eigen::Index k = 0; k < N; ++k) {
            const double s = k == 0 ? std::sqrt(1.0 / N) : std::sqrt(2.0 / N);
            psi(i, k) = s * std::cos(std::numbers::pi * (2.0 * i + 1.0) * k / (2.0 * N));
        }
    }
    return psi;
}

inline Mat basis_matrix(Basis b, std::size_t n) {
    if (b == Basis::dct) return dct_basis(n);
    return Mat::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

/// y = Φ x with an explicitly supplied Φ.
inline CompressedVector compress_with(const Vec& x, const SensingMatrix& phi, std::uint64_t master_seed) {
    require_dims(static_cast<std::size_t>(x.size()) == phi.n, "compress: x length must equal n");
    return {phi.entries * x, phi.m, phi.n, master_seed};
}

inline CompressedVector compress(const Vec& x, double c, const CodecConfig& cfg) {
    require_dims(static_cast<std::size_t>(x.size()) == cfg.n, "compress: x length must equal codec n");
    const auto m = ratio_to_m(c, cfg.n);
    return compress_with(x, derive_phi(cfg.master_seed, m, cfg.n), cfg.master_seed);
}

/// Largest eigenvalue of A^T A.
inline double lipschitz_constant(const Mat& A) {
    const Mat G = A.rows() <= A.cols() ? Mat(A * A.transpose()) : Mat(A.transpose() * A);
    Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

inline double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

namespace detail {

// Proximal-gradient iterations from x at a fixed L1 weight; returns iterations used.
inline std::size_t shrink_iterate(const Mat& G, const Vec& Aty, double L, double lambda, double tol,
                                  std::size_t budget, bool accelerated, Vec& x, bool& converged) {
    const double step = 1.0 / L;
    const double thresh = lambda * step;
    Vec x_prev = x, z = x;
    double t = 1.0;
    converged = false;
    std::size_t it = 0;
    while (it < budget) {
        x_prev = x;
        const Vec& point = accelerated ? z : x_prev;
        const Vec v = point - step * (G * point - Aty);
        x = v.unaryExpr([thresh](double e) { return soft_threshold(e, thresh); });
        ++it;

        const Vec dx = x - x_prev;
        if (dx.cwiseAbs().maxCoeff() <= tol * std::max(1.0, x.cwiseAbs().maxCoeff()) && it > 1) {
            converged = true;
            break;
        }
        if (accelerated) {
            // restart momentum when it points uphill
            if ((z - x).dot(dx) > 0.0) {
                t = 1.0;
                z = x;
            } else {
                const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
                z = x + ((t - 1.0) / t_next) * dx;
                t = t_next;
            }
        }
    }
    return it;
}

} // namespace detail

/// Minimizes 1/2 ||A x - y||^2 + lambda ||x||_1 by iterative shrinkage with step 1/L.
/// With continuation the weight starts near ||A^T y||_inf and is halved down to
/// lambda, warm-starting each stage; the step budget is shared across stages.
/// The result approximates basis pursuit as lambda -> 0.
inline RecoveryResult ista(const Mat& A, const Vec& y, const IstaParams& p) {
    RecoveryResult res;
    res.x = Vec::Zero(A.cols());
    const double L = lipschitz_constant(A);
    if (!(L > 0.0)) return res;
    const Vec Aty = A.transpose() * y;
    const Mat G = A.transpose() * A;

    std::size_t used = 0;
    bool converged = false;
    if (p.continuation) {
        const double stage_tol = std::max(p.tol, 1e-4);
        for (double lam = 0.5 * Aty.cwiseAbs().maxCoeff(); lam > p.lambda && used < p.max_iters; lam *= 0.5) {
            const std::size_t budget = std::min(p.max_iters - used, std::max<std::size_t>(p.max_iters / 20, 50));
            used += detail::shrink_iterate(G, Aty, L, lam, stage_tol, budget, p.accelerated, res.x, converged);
        }
    }
    if (used < p.max_iters)
        used += detail::shrink_iterate(G, Aty, L, p.lambda, p.tol, p.max_iters - used, p.accelerated, res.x, converged);
    else
        converged = false;
    res.iterations = used;
    res.converged = converged;
    return res;
}

/// Basis pursuit: min ||x||_1 s.t. A x = y, as an LP over x = u - v, u, v >= 0.
inline RecoveryResult basis_pursuit(const Mat& A, const Vec& y) {
    const Eigen::Index n = A.cols();
    Mat Alp(A.rows(), 2 * n);
    Alp << A, -A;
    const Vec c = Vec::Ones(2 * n);
    try {
        const auto sol = lp::solve(Alp, y, c);
        return {sol.x.head(n) - sol.x.tail(n), true, sol.iterations};
    } catch (const lp::LpError& e) {
        throw RecoveryError(std::string("basis pursuit failed: ") + e.what());
    }
}

/// Decodes with an explicitly supplied Φ (Ψ from cfg).
inline RecoveryResult recover_with(const CompressedVector& cv, const SensingMatrix& phi, const CodecConfig& cfg) {
    require_dims(static_cast<std::size_t>(cv.y.size()) == cv.m && cv.m == phi.m && cv.n == phi.n,
                 "recover: compressed vector inconsistent with sensing matrix");
    const Mat psi = basis_matrix(cfg.basis, cv.n);
    const Mat A = cfg.basis == Basis::identity ? phi.entries : Mat(phi.entries * psi);
    RecoveryResult r = cfg.solver == Solver::lp ? basis_pursuit(A, cv.y) : ista(A, cv.y, cfg.ista);
    if (cfg.basis != Basis::identity) r.x = psi * r.x;
    return r;
}

inline RecoveryResult recover_detailed(const CompressedVector& cv, const CodecConfig& cfg) {
    if (cv.n != cfg.n) throw DimensionError("recover: compressed vector n differs from codec n");
    return recover_with(cv, derive_phi(cv.master_seed, cv.m, cv.n), cfg);
}

inline Vec recover(const CompressedVector& cv, const CodecConfig& cfg) { return recover_detailed(cv, cfg).x; }

inline double rmse(const Vec& x, const Vec& x_hat) {
    require_dims(x.size() == x_hat.size(), "rmse: length mismatch");
    if (x.size() == 0) return 0.0;
    return std::sqrt((x - x_hat).squaredNorm() / static_cast<double>(x.size()));
}

/// E(c) = k1 (-k2 c^k3 + k4 - k5 e^k6). Not clamped.
inline double compression_score(double c, double e, const ScoreParams& p) {
    return p.k1 * (-p.k2 * std::pow(c, p.k3) + p.k4 - p.k5 * std::pow(e, p.k6));
}

} // namespace csrl::cs
