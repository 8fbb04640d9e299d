#include <gtest/gtest.h>

#include <csrl/numerics.hpp>

using namespace csrl;

TEST(Gaussian, SameSeedIsReproducible) {
    Rng a(42), b(42);
    EXPECT_EQ(gaussian(a, 5, 7), gaussian(b, 5, 7));
}

TEST(Gaussian, DifferentSeedsDiffer) {
    Rng a(1), b(2);
    EXPECT_NE(gaussian(a, 3, 3), gaussian(b, 3, 3));
}

TEST(Gaussian, SampleMoments) {
    Rng rng(7);
    const Mat g = gaussian(rng, 100, 100);
    const double mean = g.mean();
    const double var = (g.array() - mean).square().sum() / static_cast<double>(g.size() - 1);
    EXPECT_LT(std::abs(mean), 0.05);
    EXPECT_LT(std::abs(var - 1.0), 0.1);
}

TEST(Gaussian, RejectsEmptyShape) {
    Rng rng(0);
    EXPECT_THROW(gaussian(rng, 0, 3), DimensionError);
}

TEST(Rng, IndependentInstancesDoNotShareState) {
    Rng a(9), b(9);
    a.normal();
    a.normal();
    Rng c(9);
    EXPECT_EQ(b.normal(), c.normal());
}

TEST(Solve, IdentityReturnsRhs) {
    Rng rng(3);
    const Mat B = gaussian(rng, 3, 4);
    EXPECT_TRUE(solve(Mat::Identity(3, 3), B).isApprox(B, 1e-15));
}

TEST(Solve, Diagonal) {
    Mat A(2, 2);
    A << 2, 0, 0, 4;
    Mat B(2, 1);
    B << 2, 8;
    const Mat X = solve(A, B);
    EXPECT_DOUBLE_EQ(X(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(X(1, 0), 2.0);
}

// Construct-then-solve oracle: X* is known, B = A X*.
TEST(Solve, RoundTripRandomSystems) {
    for (Eigen::Index n : {20, 100, 500}) {
        Rng rng(static_cast<std::uint64_t>(n));
        Mat A = gaussian(rng, n, n);
        A.diagonal().array() += 2.0 * std::sqrt(static_cast<double>(n)); // well conditioned
        const Mat Xs = gaussian(rng, n, 3);
        const Mat B = A * Xs;
        const Mat X = solve(A, B);
        EXPECT_LE((A * X - B).norm() / std::max(1.0, B.norm()), 1e-8) << "n=" << n;
        EXPECT_LE((X - Xs).cwiseAbs().maxCoeff(), 1e-8) << "n=" << n;
    }
}

TEST(Solve, SingularThrows) {
    Mat A(3, 3);
    A << 1, 2, 3, 2, 4, 6, 1, 0, 1;
    EXPECT_THROW(solve(A, Mat::Ones(3, 1)), SingularMatrixError);
}

TEST(Solve, ShapeMismatchThrows) {
    EXPECT_THROW(solve(Mat::Identity(3, 3), Mat::Ones(2, 1)), DimensionError);
    EXPECT_THROW(solve(Mat::Ones(2, 3), Mat::Ones(2, 1)), DimensionError);
}

TEST(Sigmoid, KnownValues) {
    EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
    EXPECT_DOUBLE_EQ(sigmoid_derivative(0.0), 0.25);
    EXPECT_DOUBLE_EQ(sigmoid(1000.0), 1.0);
    EXPECT_EQ(sigmoid(-1000.0), 0.0 + sigmoid(-1000.0)); // finite, no NaN
    EXPECT_TRUE(std::isfinite(sigmoid(-1000.0)));
    EXPECT_TRUE(std::isfinite(sigmoid_derivative(1000.0)));
}

TEST(Sigmoid, MonotoneAndBounded) {
    Rng rng(11);
    double prev = -1.0;
    for (double z = -40.0; z <= 40.0; z += 0.01) {
        const double s = sigmoid(z);
        EXPECT_GE(s, prev);
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0);
        prev = s;
    }
    for (int i = 0; i < 1000; ++i) {
        const double z = 10.0 * rng.normal();
        EXPECT_GT(sigmoid(z), 0.0);
        EXPECT_LT(sigmoid(z), 1.0);
    }
}

TEST(Sigmoid, ElementwiseMatchesScalar) {
    Rng rng(5);
    const Mat z = gaussian(rng, 4, 6);
    const Mat s = sigmoid(z);
    const Mat d = sigmoid_derivative(z);
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        for (Eigen::Index j = 0; j < z.cols(); ++j) {
            EXPECT_DOUBLE_EQ(s(i, j), sigmoid(z(i, j)));
            EXPECT_DOUBLE_EQ(d(i, j), sigmoid_derivative(z(i, j)));
        }
}
