#include <gtest/gtest.h>

#include <csrl/lp.hpp>

using namespace csrl;

TEST(Simplex, SmallProblem) {
    // min -x0 - x1  s.t. x0 + 2 x1 + s0 = 4, 3 x0 + x1 + s1 = 6
    Mat A(2, 4);
    A << 1, 2, 1, 0, 3, 1, 0, 1;
    Vec b(2);
    b << 4, 6;
    Vec c(4);
    c << -1, -1, 0, 0;
    const auto sol = lp::solve(A, b, c);
    EXPECT_NEAR(sol.x(0), 1.6, 1e-12);
    EXPECT_NEAR(sol.x(1), 1.2, 1e-12);
    EXPECT_NEAR(sol.objective, -2.8, 1e-12);
}

TEST(Simplex, NegativeRhsAndRedundantRow) {
    // x0 - x1 = -1 stated twice; min x0 + x1 -> x = (0, 1)
    Mat A(2, 2);
    A << 1, -1, 2, -2;
    Vec b(2);
    b << -1, -2;
    Vec c(2);
    c << 1, 1;
    const auto sol = lp::solve(A, b, c);
    EXPECT_NEAR(sol.x(0), 0.0, 1e-12);
    EXPECT_NEAR(sol.x(1), 1.0, 1e-12);
}

TEST(Simplex, Infeasible) {
    Mat A(2, 1);
    A << 1, 1;
    Vec b(2);
    b << 1, 2;
    EXPECT_THROW(lp::solve(A, b, Vec::Ones(1)), lp::InfeasibleError);
}

TEST(Simplex, Unbounded) {
    Mat A(1, 2);
    A << 1, -1;
    Vec b(1);
    b << 1;
    Vec c(2);
    c << 0, -1;
    EXPECT_THROW(lp::solve(A, b, c), lp::UnboundedError);
}
