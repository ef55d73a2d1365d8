#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "cdl/lp.hpp"

using namespace cdl;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("lp: single variable with binding row") {
    LinearProgram lp;
    lp.objective = {1.0};
    lp.rows = {{1.0}};
    lp.rhs = {3.0};
    lp.lower = {0.0};
    lp.upper = {10.0};
    LpSolution sol = solve(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.value == Catch::Approx(3.0).margin(1e-9));
    CHECK(sol.x[0] == Catch::Approx(3.0).margin(1e-9));
}

TEST_CASE("lp: shared budget") {
    LinearProgram lp;
    lp.objective = {1.0, 1.0};
    lp.rows = {{1.0, 1.0}};
    lp.rhs = {1.0};
    lp.lower = {0.0, 0.0};
    lp.upper = {1.0, 1.0};
    LpSolution sol = solve(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.value == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("lp: infeasible system") {
    LinearProgram lp;
    lp.objective = {1.0};
    lp.rows = {{1.0}};
    lp.rhs = {-1.0};
    lp.lower = {0.0};
    lp.upper = {kInf};
    CHECK(solve(lp).status == LpStatus::Infeasible);
}

TEST_CASE("lp: unbounded") {
    LinearProgram lp;
    lp.objective = {1.0};
    lp.lower = {0.0};
    lp.upper = {kInf};
    CHECK(solve(lp).status == LpStatus::Unbounded);
}

TEST_CASE("lp: negative lower bounds and phase 1") {
    // maximize -x subject to x >= 0.5 (as -x <= -0.5), x in [-1, 1]
    LinearProgram lp;
    lp.objective = {-1.0};
    lp.rows = {{-1.0}};
    lp.rhs = {-0.5};
    lp.lower = {-1.0};
    lp.upper = {1.0};
    LpSolution sol = solve(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.x[0] == Catch::Approx(0.5).margin(1e-9));
    CHECK(sol.value == Catch::Approx(-0.5).margin(1e-9));
}

TEST_CASE("lp: deterministic across repeated solves") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        LinearProgram lp;
        int n = 4, rows = 6;
        for (int j = 0; j < n; ++j) {
            lp.objective.push_back(unif(rng));
            lp.lower.push_back(0.0);
            lp.upper.push_back(1.0);
        }
        for (int i = 0; i < rows; ++i) {
            std::vector<double> row;
            for (int j = 0; j < n; ++j) row.push_back(unif(rng));
            lp.rows.push_back(row);
            lp.rhs.push_back(std::abs(unif(rng)));  // feasible at the origin
        }
        LpSolution a = solve(lp);
        LpSolution b = solve(lp);
        REQUIRE(a.status == LpStatus::Optimal);
        CHECK(a.value == b.value);
        CHECK(a.x == b.x);
    }
}

TEST_CASE("lp: returned point is feasible and dominates sampled feasible points") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        std::uniform_int_distribution<int> n_dist(2, 6), r_dist(1, 8);
        int n = n_dist(rng), rows = r_dist(rng);
        LinearProgram lp;
        for (int j = 0; j < n; ++j) {
            lp.objective.push_back(unif(rng));
            lp.lower.push_back(0.0);
            lp.upper.push_back(1.0);
        }
        for (int i = 0; i < rows; ++i) {
            std::vector<double> row;
            for (int j = 0; j < n; ++j) row.push_back(unif(rng));
            lp.rows.push_back(row);
            lp.rhs.push_back(unit(rng));  // nonnegative: origin feasible
        }
        LpSolution sol = solve(lp);
        REQUIRE(sol.status == LpStatus::Optimal);

        for (std::size_t i = 0; i < lp.rows.size(); ++i) {
            double lhs = 0.0;
            for (int j = 0; j < n; ++j) lhs += lp.rows[i][static_cast<std::size_t>(j)] * sol.x[static_cast<std::size_t>(j)];
            CHECK(lhs <= lp.rhs[i] + 1e-9);
        }

        // scale random box points back into the feasible region, then compare
        for (int probe = 0; probe < 200; ++probe) {
            std::vector<double> u(static_cast<std::size_t>(n));
            for (auto& v : u) v = unit(rng);
            double t = 1.0;
            for (std::size_t i = 0; i < lp.rows.size(); ++i) {
                double a = 0.0;
                for (int j = 0; j < n; ++j) a += lp.rows[i][static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(j)];
                if (a > lp.rhs[i]) t = std::min(t, lp.rhs[i] / a);
            }
            double val = 0.0;
            for (int j = 0; j < n; ++j) val += lp.objective[static_cast<std::size_t>(j)] * t * u[static_cast<std::size_t>(j)];
            CHECK(val <= sol.value + 1e-7);
        }
    }
}
