#include <doctest.h>

#include <random>

#include "mrflp/errors.hpp"
#include "mrflp/lp.hpp"
#include "test_support.hpp"

using namespace mrflp;

namespace {

LpProblem single_var(double cost, double lo, double hi)
{
    LpProblem p(1);
    p.set_cost(0, cost);
    p.set_bounds(0, lo, hi);
    return p;
}

/// Feasible by construction: rows are satisfied at a random interior point,
/// and every variable is boxed so the problem is bounded.
LpProblem random_feasible_lp(std::mt19937_64& rng, int n, int m)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    LpProblem p(n);
    std::vector<double> x0(n);
    for (int j = 0; j < n; ++j) {
        p.set_cost(j, u(rng));
        const double lo = u(rng) - 1.0;
        const double hi = lo + 0.5 + std::abs(u(rng)) * 2.0;
        p.set_bounds(j, lo, hi);
        x0[j] = 0.5 * (lo + hi);
    }
    for (int i = 0; i < m; ++i) {
        LpRow row;
        double ax = 0.0;
        for (int j = 0; j < n; ++j) {
            if (u(rng) < 0.0) continue;
            row.cols.push_back(j);
            row.values.push_back(u(rng));
            ax += row.values.back() * x0[j];
        }
        if (row.cols.empty()) continue;
        row.rhs = ax + 0.1 + std::abs(u(rng));
        p.add_row(row);
    }
    return p;
}

}  // namespace

TEST_CASE("bound-active minimum")
{
    const auto s = solve_lp(single_var(1.0, 1.0, 2.0));
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(s.objective == doctest::Approx(1.0).epsilon(1e-8));
    const auto r = solve_lp_dense_reference(single_var(1.0, 1.0, 2.0));
    CHECK(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(1.0));
}

TEST_CASE("negative cost drives the variable to its upper bound")
{
    const auto s = solve_lp(single_var(-1.0, 0.0, 1.0));
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.x[0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("infeasible rows are reported")
{
    LpProblem p(1);
    p.set_cost(0, 1.0);
    p.add_row({{0}, {1.0}, 0.0});
    p.add_row({{0}, {-1.0}, -1.0});
    CHECK(solve_lp_dense_reference(p).status == LpStatus::Infeasible);
    CHECK(solve_lp(p).status == LpStatus::Infeasible);
}

TEST_CASE("unbounded objective is reported")
{
    LpProblem p(2);
    p.set_cost(0, -1.0);
    p.set_bounds(0, 0.0, kInfinity);
    p.set_bounds(1, 0.0, 1.0);
    p.add_row({{0, 1}, {-1.0, 1.0}, 0.0});
    CHECK(solve_lp(p).status == LpStatus::Unbounded);
}

TEST_CASE("empty problems are trivially optimal")
{
    const auto s = solve_lp(LpProblem(0));
    CHECK(s.status == LpStatus::Optimal);
    CHECK(s.x.empty());
    const auto t = solve_lp(single_var(2.0, -1.0, 3.0));
    CHECK(t.status == LpStatus::Optimal);
    CHECK(t.x[0] == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("dense reference rejects large problems")
{
    CHECK_THROWS_AS(solve_lp_dense_reference(LpProblem(kReferenceMaxVariables + 1)),
                    InvalidInputError);
}

TEST_CASE("problem validation")
{
    LpProblem p(2);
    CHECK_THROWS_AS(p.set_bounds(0, 1.0, 0.0), InvalidInputError);
    p.add_row({{3}, {1.0}, 0.0});
    CHECK_THROWS_AS(p.validate(), InvalidInputError);
}

TEST_CASE("interior point matches vertex enumeration on random LPs")
{
    std::mt19937_64 rng(61);
    int compared = 0;
    for (int inst = 0; inst < 40; ++inst) {
        const int n = 1 + inst % 8;
        const int m = inst % 13;
        const auto p = random_feasible_lp(rng, n, m);
        const auto ref = solve_lp_dense_reference(p);
        REQUIRE(ref.status == LpStatus::Optimal);
        const auto s = solve_lp(p);
        REQUIRE(s.status == LpStatus::Optimal);
        CHECK(s.objective == doctest::Approx(ref.objective).epsilon(1e-6).scale(1.0));
        CHECK(p.max_violation(s.x) <= 1e-8);
        CHECK(s.max_violation <= 1e-8);
        CHECK(s.relative_gap <= 1e-8);
        ++compared;
    }
    CHECK(compared == 40);
}

TEST_CASE("three-variable LP agrees between both solvers")
{
    LpProblem p(3);
    p.set_cost(0, -1.0);
    p.set_cost(1, -2.0);
    p.set_cost(2, 0.5);
    for (int j = 0; j < 3; ++j) p.set_bounds(j, 0.0, 4.0);
    p.add_row({{0, 1, 2}, {1.0, 1.0, 1.0}, 5.0});
    p.add_row({{0, 1}, {1.0, -1.0}, 1.0});
    p.add_row({{1, 2}, {1.0, -2.0}, 2.0});
    const auto ref = solve_lp_dense_reference(p);
    const auto s = solve_lp(p);
    CHECK(s.objective == doctest::Approx(ref.objective).epsilon(1e-8));
    CHECK(mrflp::test::max_abs_diff(s.x, ref.x) <= 1e-6);
}

TEST_CASE("argmin is invariant under positive cost scaling")
{
    std::mt19937_64 rng(67);
    for (int inst = 0; inst < 10; ++inst) {
        auto p = random_feasible_lp(rng, 6, 8);
        const auto a = solve_lp(p);
        const auto ref = solve_lp_dense_reference(p);
        // Only compare the primal point when the optimum is unique.
        LpProblem q = p;
        for (int j = 0; j < p.variable_count(); ++j) q.set_cost(j, 7.5 * p.cost()[j]);
        const auto b = solve_lp(q);
        REQUIRE(a.status == LpStatus::Optimal);
        REQUIRE(b.status == LpStatus::Optimal);
        CHECK(b.objective == doctest::Approx(7.5 * a.objective).epsilon(1e-6));
        if (mrflp::test::max_abs_diff(a.x, ref.x) <= 1e-6)
            CHECK(mrflp::test::max_abs_diff(a.x, b.x) <= 1e-6);
    }
}

TEST_CASE("LP JSON round trip keeps infinite bounds")
{
    LpProblem p(2);
    p.set_cost(0, 1.5);
    p.set_bounds(0, -kInfinity, 2.0);
    p.set_bounds(1, 0.0, kInfinity);
    p.add_row({{0, 1}, {1.0, -1.0}, 3.0});
    const auto j = p.to_json();
    CHECK(j["v"] == 1);
    CHECK(j["lo"][0].is_null());
    CHECK(j["hi"][1].is_null());
    const auto q = LpProblem::from_json(j);
    CHECK(q.cost() == p.cost());
    CHECK(q.lower() == p.lower());
    CHECK(q.upper() == p.upper());
    REQUIRE(q.row_count() == 1);
    CHECK(q.rows()[0].cols == p.rows()[0].cols);
    CHECK(q.rows()[0].rhs == 3.0);
}

TEST_CASE("iteration limit is reported as a status")
{
    std::mt19937_64 rng(71);
    const auto p = random_feasible_lp(rng, 8, 12);
    LpOptions o;
    o.max_iterations = 1;
    const auto s = solve_lp(p, o);
    CHECK(s.status == LpStatus::IterationLimit);
    CHECK(s.x.size() == 8);
}
