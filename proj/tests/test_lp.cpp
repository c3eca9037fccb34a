#include <cmath>
#include <random>

#include "doctest.h"

#include "banach/lp.hpp"

using namespace banach::lp;

TEST_CASE("simplex solves a small standard-form program") {
    // min x1 + x2 + x3  s.t.  x1 - x2 = 1, x2 + x3 = 2
    Eigen::MatrixXd a(2, 3);
    a << 1, -1, 0, 0, 1, 1;
    Eigen::VectorXd b(2);
    b << 1, 2;
    Eigen::VectorXd c = Eigen::VectorXd::Ones(3);
    const auto s = solve_standard_form(a, b, c);
    REQUIRE(s.status == Status::Optimal);
    CHECK(s.objective == doctest::Approx(3.0));
    CHECK((a * s.x - b).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(b.dot(s.y) == doctest::Approx(s.objective));
    CHECK(((a.transpose() * s.y) - c).maxCoeff() <= 1e-10);
}

TEST_CASE("simplex reports infeasibility") {
    Eigen::MatrixXd a(1, 2);
    a << 1, 1;
    Eigen::VectorXd b(1);
    b << -1;
    const auto s = solve_standard_form(a, b, Eigen::VectorXd::Ones(2));
    CHECK(s.status == Status::Infeasible);
}

TEST_CASE("cross-polytope gauge programs reproduce the l1 norm with certified duals") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + trial % 4;
        Eigen::MatrixXd a(n, 2 * n);
        a.leftCols(n).setIdentity();
        a.rightCols(n) = -Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd x(n);
        for (int i = 0; i < n; ++i) x(i) = g(rng);
        const auto s = solve_standard_form(a, x, Eigen::VectorXd::Ones(2 * n));
        REQUIRE(s.status == Status::Optimal);
        CHECK(s.objective == doctest::Approx(x.cwiseAbs().sum()).epsilon(1e-12));
        CHECK(s.y.cwiseAbs().maxCoeff() <= 1.0 + 1e-10);
        CHECK(x.dot(s.y) == doctest::Approx(s.objective).epsilon(1e-12));
    }
}
