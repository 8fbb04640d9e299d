#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace csrl {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

class SingularMatrixError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline void require_dims(bool ok, const std::string& what) {
    if (!ok) throw DimensionError("dimension mismatch: " + what);
}

// splitmix64 finalizer, used to derive child seeds from (seed, tag...) tuples.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

template <typename... Tags>
constexpr std::uint64_t derive_seed(std::uint64_t seed, Tags... tags) {
    std::uint64_t h = mix64(seed);
    ((h = mix64(h ^ static_cast<std::uint64_t>(tags))), ...);
    return h;
}

/// Seeded random stream. Single owner; copying forks the stream state.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// i.i.d. N(0,1) entries, drawn in row-major order.
inline Mat gaussian(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    if (rows < 1 || cols < 1) throw DimensionError("gaussian: rows and cols must be >= 1");
    Mat out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = rng.normal();
    return out;
}

/// i.i.d. U[lo, hi) entries, drawn in row-major order.
inline Mat uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = 0.0, double hi = 1.0) {
    Mat out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = rng.uniform(lo, hi);
    return out;
}

/// Solves A X = B by partial-pivot LU. Throws SingularMatrixError when a pivot
/// collapses relative to the largest entry of A.
inline Mat solve(const Mat& A, const Mat& B) {
    require_dims(A.rows() == A.cols(), "solve: A must be square");
    require_dims(B.rows() == A.rows(), "solve: B.rows must equal A.rows");
    const double scale = A.cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || !std::isfinite(scale)) throw SingularMatrixError("solve: zero or non-finite matrix");
    Eigen::PartialPivLU<Mat> lu(A);
    const auto& U = lu.matrixLU();
    const double tol = scale * static_cast<double>(A.rows()) * std::numeric_limits<double>::epsilon();
    for (Eigen::Index i = 0; i < U.rows(); ++i)
        if (std::abs(U(i, i)) <= tol) throw SingularMatrixError("solve: matrix is singular to working precision");
    Mat X = lu.solve(B);
    if (!X.allFinite()) throw SingularMatrixError("solve: non-finite solution");
    return X;
}

/// Solves A X = B for symmetric positive definite A via Cholesky.
inline Mat solve_spd(const Mat& A, const Mat& B) {
    require_dims(A.rows() == A.cols() && B.rows() == A.rows(), "solve_spd");
    Eigen::LLT<Mat> llt(A);
    if (llt.info() != Eigen::Success) return solve(A, B);
    return llt.solve(B);
}

inline double sigmoid(double z) {
    // Branch on sign so exp never overflows.
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline double sigmoid_derivative(double z) {
    const double s = sigmoid(z);
    return s * (1.0 - s);
}

template <typename Derived>
Mat sigmoid(const Eigen::MatrixBase<Derived>& z) {
    return z.unaryExpr([](double v) { return sigmoid(v); });
}

template <typename Derived>
Mat sigmoid_derivative(const Eigen::MatrixBase<Derived>& z) {
    return z.unaryExpr([](double v) { return sigmoid_derivative(v); });
}

enum class Activation { sigmoid, identity };

inline Activation activation_from_string(const std::string& s) {
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "identity") return Activation::identity;
    throw std::invalid_argument("unknown activation: " + s);
}

inline std::string to_string(Activation a) {
    return a == Activation::sigmoid ? "sigmoid" : "identity";
}

inline double activate(Activation a, double z) {
    return a == Activation::sigmoid ? sigmoid(z) : z;
}

inline double activate_derivative(Activation a, double z) {
    return a == Activation::sigmoid ? sigmoid_derivative(z) : 1.0;
}

template <typename Derived>
Mat activate(Activation a, const Eigen::MatrixBase<Derived>& z) {
    if (a == Activation::identity) return z;
    return sigmoid(z);
}

template <typename Derived>
Mat activate_derivative(Activation a, const Eigen::MatrixBase<Derived>& z) {
    if (a == Activation::identity) return Mat::Ones(z.rows(), z.cols());
    return sigmoid_derivative(z);
}

inline Vec concat(const Vec& a, const Vec& b) {
    Vec out(a.size() + b.size());
    out << a, b;
    return out;
}

} // namespace csrl
