#include "banach/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace banach::lp {
namespace {

struct Tableau {
    Eigen::MatrixXd t;  // rows: constraints then objective; last column: rhs
    std::vector<int> basis;
    int rows;
    int cols;  // structural + artificial columns, excluding rhs

    void pivot(int r, int c) {
        t.row(r) /= t(r, c);
        for (int i = 0; i < t.rows(); ++i) {
            if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
        }
        basis[r] = c;
    }

    // Runs Bland's rule on the objective row `obj` restricted to columns [0, usable).
    Status optimize(int obj, int usable, double tol) {
        for (int iter = 0; iter < 10000; ++iter) {
            int enter = -1;
            for (int j = 0; j < usable; ++j) {
                if (t(obj, j) < -tol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return Status::Optimal;
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < rows; ++i) {
                if (t(i, enter) > tol) {
                    const double ratio = t(i, cols) / t(i, enter);
                    if (leave < 0 || ratio < best - 1e-15 ||
                        (std::fabs(ratio - best) <= 1e-15 && basis[i] < basis[leave])) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return Status::Unbounded;
            pivot(leave, enter);
        }
        return Status::Unbounded;
    }
};

}  // namespace

Solution solve_standard_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                             double tolerance) {
    const int m = static_cast<int>(a.rows());
    const int n = static_cast<int>(a.cols());
    Solution sol;
    sol.x = Eigen::VectorXd::Zero(n);
    sol.y = Eigen::VectorXd::Zero(m);

    Tableau tab;
    tab.rows = m;
    tab.cols = n + m;
    tab.t = Eigen::MatrixXd::Zero(m + 2, n + m + 1);
    tab.basis.resize(m);
    for (int i = 0; i < m; ++i) {
        const double sign = b(i) < 0.0 ? -1.0 : 1.0;
        tab.t.row(i).head(n) = sign * a.row(i);
        tab.t(i, n + i) = 1.0;
        tab.t(i, n + m) = sign * b(i);
        tab.basis[i] = n + i;
    }
    const int phase2 = m;
    const int phase1 = m + 1;
    tab.t.row(phase2).head(n) = c.transpose();
    for (int i = 0; i < m; ++i) tab.t.row(phase1) -= tab.t.row(i);
    for (int i = 0; i < m; ++i) tab.t(phase1, n + i) = 0.0;

    tab.optimize(phase1, n + m, tolerance);
    if (-tab.t(phase1, n + m) > 1e3 * tolerance * (1.0 + b.cwiseAbs().sum())) {
        sol.status = Status::Infeasible;
        return sol;
    }
    // Drive remaining artificials out of the basis.
    std::vector<bool> redundant(m, false);
    for (int i = 0; i < m; ++i) {
        if (tab.basis[i] < n) continue;
        int col = -1;
        for (int j = 0; j < n; ++j) {
            if (std::fabs(tab.t(i, j)) > tolerance) {
                col = j;
                break;
            }
        }
        if (col >= 0) {
            tab.pivot(i, col);
        } else {
            redundant[i] = true;
        }
    }
    // Express the phase-2 objective in terms of the current basis.
    for (int i = 0; i < m; ++i) {
        const int bc = tab.basis[i];
        if (bc < n && tab.t(phase2, bc) != 0.0) tab.t.row(phase2) -= tab.t(phase2, bc) * tab.t.row(i);
    }
    const Status st = tab.optimize(phase2, n, tolerance);
    if (st != Status::Optimal) {
        sol.status = st;
        return sol;
    }
    for (int i = 0; i < m; ++i) {
        if (tab.basis[i] < n) sol.x(tab.basis[i]) = tab.t(i, n + m);
    }
    sol.objective = c.dot(sol.x);

    // Multipliers from B^T y = c_B over the non-redundant rows.
    std::vector<int> keep;
    for (int i = 0; i < m; ++i) {
        if (!redundant[i]) keep.push_back(i);
    }
    const int k = static_cast<int>(keep.size());
    Eigen::MatrixXd bt = Eigen::MatrixXd::Zero(k, m);
    Eigen::VectorXd cb(k);
    for (int r = 0; r < k; ++r) {
        const int col = tab.basis[keep[r]];
        bt.row(r) = a.col(col).transpose();
        cb(r) = c(col);
    }
    sol.y = bt.colPivHouseholderQr().solve(cb);
    sol.status = Status::Optimal;
    return sol;
}

}  // namespace banach::lp
