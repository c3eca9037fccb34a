#pragma once

// Dense two-phase simplex for the small linear programs behind polytope
// gauges:  minimize c.x  subject to  A x = b,  x >= 0.
//
// Sizes here are a handful of rows and a few dozen columns, so a tableau with
// Bland's rule is plenty and never cycles.

#include <Eigen/Dense>

namespace banach::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
    Status status = Status::Infeasible;
    double objective = 0.0;
    Eigen::VectorXd x;  ///< primal point
    Eigen::VectorXd y;  ///< equality multipliers: A^T y <= c, b.y = objective
};

Solution solve_standard_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                             double tolerance = 1e-11);

}  // namespace banach::lp
