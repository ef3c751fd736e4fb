#include "simba/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace simba::lp {

namespace {

constexpr double kEps = 1e-10;

struct Tableau {
    Eigen::MatrixXd t;  // m constraint rows + objective row; last column is the rhs
    std::vector<int> basis;
    std::vector<bool> blocked;  // columns that may not enter

    int rows() const { return static_cast<int>(basis.size()); }
    int cols() const { return static_cast<int>(t.cols()) - 1; }

    void pivot(int r, int c) {
        t.row(r) /= t(r, c);
        for (int i = 0; i < t.rows(); ++i)
            if (i != r && std::abs(t(i, c)) > 0.0) t.row(i) -= t(i, c) * t.row(r);
        basis[static_cast<std::size_t>(r)] = c;
    }

    // Maximizes the objective encoded in the last row. False if unbounded.
    bool solve() {
        const int m = rows();
        for (int guard = 0; guard < 100000; ++guard) {
            int enter = -1;
            for (int j = 0; j < cols(); ++j)
                if (!blocked[static_cast<std::size_t>(j)] && t(m, j) < -kEps) {
                    enter = j;
                    break;
                }
            if (enter < 0) return true;
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < m; ++i) {
                if (t(i, enter) <= kEps) continue;
                const double ratio = t(i, cols()) / t(i, enter);
                if (leave < 0 || ratio < best - kEps) {
                    best = ratio;
                    leave = i;
                } else if (ratio <= best + kEps &&
                           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)]) {
                    leave = i;
                }
            }
            if (leave < 0) return false;
            pivot(leave, enter);
        }
        return true;
    }
};

}  // namespace

Result maximize(const Eigen::VectorXd& c, const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    int nart = 0;
    for (int i = 0; i < m; ++i)
        if (b(i) < 0) ++nart;
    const int total = 2 * n + m + nart;

    Tableau tab;
    tab.t = Eigen::MatrixXd::Zero(m + 1, total + 1);
    tab.basis.assign(static_cast<std::size_t>(m), 0);
    tab.blocked.assign(static_cast<std::size_t>(total), false);
    int art = 2 * n + m;
    for (int i = 0; i < m; ++i) {
        const double sign = b(i) < 0 ? -1.0 : 1.0;
        tab.t.row(i).segment(0, n) = sign * A.row(i);
        tab.t.row(i).segment(n, n) = -sign * A.row(i);
        tab.t(i, 2 * n + i) = sign;
        tab.t(i, total) = sign * b(i);
        if (sign < 0) {
            tab.t(i, art) = 1.0;
            tab.basis[static_cast<std::size_t>(i)] = art++;
        } else {
            tab.basis[static_cast<std::size_t>(i)] = 2 * n + i;
        }
    }

    Result result;
    if (nart > 0) {
        // Phase 1: maximize -sum(artificials).
        for (int j = 2 * n + m; j < total; ++j) tab.t(m, j) = 1.0;
        for (int i = 0; i < m; ++i)
            if (tab.basis[static_cast<std::size_t>(i)] >= 2 * n + m) tab.t.row(m) -= tab.t.row(i);
        tab.solve();
        if (tab.t(m, total) < -1e-8) {
            result.status = Status::Infeasible;
            return result;
        }
        for (int i = 0; i < m; ++i) {
            if (tab.basis[static_cast<std::size_t>(i)] < 2 * n + m) continue;
            for (int j = 0; j < 2 * n + m; ++j)
                if (std::abs(tab.t(i, j)) > 1e-9) {
                    tab.pivot(i, j);
                    break;
                }
        }
        for (int j = 2 * n + m; j < total; ++j) tab.blocked[static_cast<std::size_t>(j)] = true;
    }

    // Phase 2.
    tab.t.row(m).setZero();
    tab.t.row(m).segment(0, n) = -c.transpose();
    tab.t.row(m).segment(n, n) = c.transpose();
    for (int i = 0; i < m; ++i) {
        const int bj = tab.basis[static_cast<std::size_t>(i)];
        if (std::abs(tab.t(m, bj)) > 0.0) tab.t.row(m) -= tab.t(m, bj) * tab.t.row(i);
    }
    if (!tab.solve()) {
        result.status = Status::Unbounded;
        return result;
    }
    result.status = Status::Optimal;
    result.value = tab.t(m, total);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(total);
    for (int i = 0; i < m; ++i) y(tab.basis[static_cast<std::size_t>(i)]) = tab.t(i, total);
    result.x = y.segment(0, n) - y.segment(n, n);
    return result;
}

}  // namespace simba::lp
