#pragma once

// Dense two-phase tableau simplex for standard-form linear programs
//     minimize c^T x  subject to  A x = b,  x >= 0.
// Sized for the basis-pursuit problems solved by the codec (a few hundred rows).

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "numerics.hpp"

namespace csrl::lp {

class LpError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class InfeasibleError : public LpError {
public:
    using LpError::LpError;
};
class UnboundedError : public LpError {
public:
    using LpError::LpError;
};

struct Options {
    double pivot_tol = 1e-9; // relative to the entering column's largest entry
    double optimality_tol = 1e-9;
    double feasibility_tol = 1e-7;
    double unbounded_tol = 1e-6;
    std::size_t max_iterations = 0; // 0: 50 * (rows + cols)
    std::size_t degenerate_switch = 50; // consecutive degenerate pivots before Bland's rule
};

struct Solution {
    Vec x;
    double objective = 0.0;
    std::size_t iterations = 0;
};

namespace detail {

class Tableau {
public:
    Tableau(const Mat& A, const Vec& b, const Options& opt)
        : m_(A.rows()), n_(A.cols()), opt_(opt), T_(Mat::Zero(A.rows() + 1, A.cols() + A.rows() + 1)),
          basis_(static_cast<std::size_t>(A.rows())) {
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double sign = b(i) < 0.0 ? -1.0 : 1.0;
            T_.row(i).head(n_) = sign * A.row(i);
            T_(i, n_ + i) = 1.0;
            T_(i, rhs()) = sign * b(i);
            basis_[static_cast<std::size_t>(i)] = n_ + i;
        }
        blocked_.assign(static_cast<std::size_t>(n_ + m_), false);
        original_ = T_.topRows(m_);
    }

    Eigen::Index rhs() const { return n_ + m_; }

    // Loads reduced costs for the given column costs (artificials included).
    void set_costs(const Vec& cost) {
        cost_ = cost;
        T_.row(m_).setZero();
        T_.row(m_).head(n_ + m_) = cost.transpose();
        for (Eigen::Index i = 0; i < m_; ++i) {
            const double cb = cost(basis_[static_cast<std::size_t>(i)]);
            if (cb != 0.0) T_.row(m_) -= cb * T_.row(i);
        }
    }

    // Runs simplex pivots to optimality of the currently loaded costs.
    void optimize(std::size_t& iterations, std::size_t max_iter) {
        std::size_t degenerate = 0;
        skipped_.assign(blocked_.size(), false);
        while (true) {
            const bool bland = degenerate >= opt_.degenerate_switch;
            Eigen::Index enter = -1;
            double best = -opt_.optimality_tol;
            for (Eigen::Index j = 0; j < n_ + m_; ++j) {
                if (blocked_[static_cast<std::size_t>(j)] || skipped_[static_cast<std::size_t>(j)]) continue;
                const double d = T_(m_, j);
                if (d < best) {
                    enter = j;
                    if (bland) break;
                    best = d;
                }
            }
            if (enter < 0) {
                if (since_reinvert_ == 0) return;
                reinvert(); // confirm optimality on freshly computed data
                continue;
            }

            const double col_scale = std::max(1.0, T_.col(enter).head(m_).cwiseAbs().maxCoeff());
            const double tol = opt_.pivot_tol * col_scale;
            Eigen::Index leave = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < m_; ++i) {
                const double a = T_(i, enter);
                if (a <= tol) continue;
                const double r = std::max(T_(i, rhs()), 0.0) / a;
                if (r < ratio - 1e-12) {
                    ratio = r;
                    leave = i;
                } else if (r <= ratio + 1e-12 && leave >= 0) {
                    // ties: Bland picks the lowest basic index, otherwise take the larger pivot
                    const bool better = bland ? basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]
                                              : a > T_(leave, enter);
                    if (better) leave = i;
                }
            }
            if (leave < 0 && since_reinvert_ > 0) {
                reinvert();
                continue;
            }
            if (leave < 0) {
                // a column with no positive entry and a reduced cost at noise level is not a ray
                if (T_(m_, enter) > -opt_.unbounded_tol) {
                    skipped_[static_cast<std::size_t>(enter)] = true;
                    continue;
                }
                throw UnboundedError("linear program is unbounded");
            }
            degenerate = ratio <= 1e-12 ? degenerate + 1 : 0;
            pivot(leave, enter);
            if (++since_reinvert_ >= kReinvertPeriod) reinvert();
            if (++iterations > max_iter) throw LpError("simplex iteration limit exceeded");
        }
    }

    void pivot(Eigen::Index row, Eigen::Index col) {
        T_.row(row) /= T_(row, col);
        const RowVec pivot_row = T_.row(row);
        for (Eigen::Index i = 0; i <= m_; ++i) {
            if (i == row) continue;
            const double f = T_(i, col);
            if (f != 0.0) T_.row(i) -= f * pivot_row;
        }
        basis_[static_cast<std::size_t>(row)] = col;
    }

    // Rebuilds the tableau as B^{-1} [A | I | b] from the original data.
    void reinvert() {
        Mat B(m_, m_);
        for (Eigen::Index i = 0; i < m_; ++i) B.col(i) = original_.col(basis_[static_cast<std::size_t>(i)]);
        Eigen::PartialPivLU<Mat> lu(B);
        T_.topRows(m_) = lu.solve(original_);
        set_costs(cost_);
        since_reinvert_ = 0;
    }

    // After phase one: pivots artificial variables out of the basis where possible and
    // forbids artificials from re-entering.
    void expel_artificials() {
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (basis_[static_cast<std::size_t>(i)] < n_) continue;
            Eigen::Index best = -1;
            double mag = opt_.pivot_tol;
            for (Eigen::Index j = 0; j < n_; ++j) {
                if (std::abs(T_(i, j)) > mag) {
                    mag = std::abs(T_(i, j));
                    best = j;
                }
            }
            if (best >= 0) pivot(i, best);
            // otherwise the row is redundant; its artificial stays basic at zero
        }
        for (Eigen::Index j = n_; j < n_ + m_; ++j) blocked_[static_cast<std::size_t>(j)] = true;
    }

    double objective_value() const { return -T_(m_, rhs()); }

    Vec primal() const {
        Vec x = Vec::Zero(n_);
        for (Eigen::Index i = 0; i < m_; ++i) {
            const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
            if (j < n_) x(j) = std::max(T_(i, rhs()), 0.0);
        }
        return x;
    }

    const std::vector<Eigen::Index>& basis() const { return basis_; }
    Eigen::Index rows() const { return m_; }
    Eigen::Index cols() const { return n_; }

private:
    Eigen::Index m_, n_;
    Options opt_;
    Mat T_;
    std::vector<Eigen::Index> basis_;
    std::vector<bool> blocked_;
    std::vector<bool> skipped_;
    Mat original_;
    Vec cost_;
    std::size_t since_reinvert_ = 0;
    static constexpr std::size_t kReinvertPeriod = 64;
};

} // namespace detail

/// Solves min c^T x s.t. A x = b, x >= 0.
/// Throws InfeasibleError, UnboundedError, or LpError (iteration limit).
inline Solution solve(const Mat& A, const Vec& b, const Vec& c, const Options& opt = {}) {
    require_dims(b.size() == A.rows(), "lp: b length must equal A.rows");
    require_dims(c.size() == A.cols(), "lp: c length must equal A.cols");
    const Eigen::Index m = A.rows(), n = A.cols();
    const std::size_t max_iter = opt.max_iterations ? opt.max_iterations : 50 * static_cast<std::size_t>(m + n);

    detail::Tableau tab(A, b, opt);
    Solution sol;

    Vec phase1 = Vec::Zero(n + m);
    phase1.tail(m).setOnes();
    tab.set_costs(phase1);
    tab.optimize(sol.iterations, max_iter);
    const double scale = 1.0 + b.cwiseAbs().sum();
    if (tab.objective_value() > opt.feasibility_tol * scale)
        throw InfeasibleError("linear program is infeasible (phase-one residual " +
                              std::to_string(tab.objective_value()) + ")");
    tab.expel_artificials();

    Vec phase2 = Vec::Zero(n + m);
    phase2.head(n) = c;
    tab.set_costs(phase2);
    tab.optimize(sol.iterations, max_iter);

    sol.x = tab.primal();

    // Recompute basic values from the original data to shed accumulated pivot error.
    std::vector<Eigen::Index> cols;
    for (auto j : tab.basis())
        if (j < n) cols.push_back(j);
    if (!cols.empty()) {
        Mat AB(m, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) AB.col(static_cast<Eigen::Index>(k)) = A.col(cols[k]);
        const Vec xb = AB.colPivHouseholderQr().solve(b);
        if (xb.allFinite() && xb.minCoeff() > -opt.feasibility_tol &&
            (AB * xb - b).norm() <= (AB * sol.x(cols) - b).norm() + 1e-12) {
            for (std::size_t k = 0; k < cols.size(); ++k)
                sol.x(cols[k]) = std::max(xb(static_cast<Eigen::Index>(k)), 0.0);
        }
    }
    sol.objective = c.dot(sol.x);
    return sol;
}

} // namespace csrl::lp
