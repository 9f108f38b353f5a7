#include <doctest.h>

#include <random>

#include "mrflp/diagnostics.hpp"
#include "mrflp/errors.hpp"
#include "mrflp/maxflow.hpp"
#include "mrflp/relaxations.hpp"
#include "test_support.hpp"

using namespace mrflp;
using mrflp::test::path_graph;
using mrflp::test::random_vector;

namespace {

FactorU factor_of(const SuperpixelGraph& g, double eps)
{
    return cholesky_upper(build_wtilde(build_incidence(g), eps));
}

/// Two chains 0-1-2 and 3-4-5 with no edge between them.
SuperpixelGraph two_chains()
{
    std::vector<FeatureVector> f(6, FeatureVector{0.0});
    return SuperpixelGraph(6, f, {{0, 1}, {1, 2}, {3, 4}, {4, 5}}, {2.0, 1.0, 1.0, 3.0});
}

void check_seeds_exact(const LabelField& field, const SeedSet& seeds)
{
    for (int s : seeds.foreground()) CHECK(field.values[s] == 1.0);
    for (int s : seeds.background()) CHECK(field.values[s] == 0.0);
}

/// Exhaustive minimum of sum B |L_i - L_j| over binary labelings.
double brute_force(const SuperpixelGraph& g, const SeedSet& s)
{
    return exhaustive_min_energy(g, s);
}

}  // namespace

TEST_CASE("method names round trip")
{
    for (Method m : kAllMethods) CHECK(parse_method(to_string(m)) == m);
    CHECK(to_string(Method::CompactLp) == "compact_lp");
    CHECK(to_string(Method::ConventionalLp) == "conv_lp");
    CHECK_THROWS_AS(parse_method("simplex"), InvalidInputError);
}

TEST_CASE("boundary energy examples")
{
    const auto g = path_graph({2.0, 1.0});
    CHECK(boundary_energy(g, {0.3, 0.3, 0.3}, 1) == 0.0);
    CHECK(boundary_energy(g, {0.3, 0.3, 0.3}, 2) == 0.0);
    CHECK(boundary_energy(g, {1.0, 1.0, 0.0}, 1) == 1.0);
    CHECK(boundary_energy(g, {1.0, 0.5, 0.0}, 2) == doctest::Approx(4 * 0.25 + 0.25));
    CHECK_THROWS_AS(boundary_energy(g, {1.0, 1.0, 0.0}, 3), InvalidInputError);
}

TEST_CASE("squared boundary energy equals the quadratic form")
{
    std::mt19937_64 rng(73);
    for (int inst = 0; inst < 10; ++inst) {
        const auto g = random_connected_graph(10, 0.3, rng);
        const auto w = build_wtilde(build_incidence(g), 0.0);
        const auto l = random_vector(10, rng);
        const double e = boundary_energy(g, l, 2);
        CHECK(std::abs(e - w.quadratic_form(l)) <= 1e-12 * std::max(1.0, e));
    }
}

TEST_CASE("energy report is zero only for componentwise constant labels")
{
    const auto g = two_chains();
    const auto f = factor_of(g, 0.0 + 1e-12);
    const auto r = energy_report(g, {0.2, 0.2, 0.2, 0.7, 0.7, 0.7}, &f);
    CHECK(r.l1 == 0.0);
    CHECK(r.l2 == 0.0);
    CHECK(r.total == 0.0);
    const auto s = energy_report(g, {0.2, 0.3, 0.2, 0.7, 0.7, 0.7}, &f);
    CHECK(s.l1 > 0.0);
    CHECK(s.l2 > 0.0);
    CHECK(s.l1plus > 0.0);
    const auto u = energy_report(g, {1, 0, 0, 0, 0, 0}, nullptr, UnaryTerm{{1, 0, 0, 0, 0, 0}, 10});
    CHECK(u.total == doctest::Approx(10 * 2.0 + 1.0));
}

TEST_CASE("compact LP has 2N variables and 2N rows")
{
    const auto g = path_graph({2.0, 1.0});
    const auto lp = assemble_compact_lp(factor_of(g, 1e-8), SeedSet({0}, {2}));
    CHECK(lp.variable_count() == 6);
    CHECK(lp.row_count() == 6);
    CHECK(lp.lower()[0] == 1.0);
    CHECK(lp.upper()[0] == 1.0);
    CHECK(lp.upper()[2] == 0.0);
    CHECK(lp.lower()[1] == 0.0);
    CHECK(lp.upper()[1] == 1.0);
    CHECK(lp.lower()[3] == 0.0);
    CHECK(lp.upper()[3] == kInfinity);
    CHECK_THROWS_AS(assemble_compact_lp(factor_of(g, 1e-8), SeedSet({3}, {0})),
                    InvalidInputError);
}

TEST_CASE("compact LP with every node pinned returns |U L_seed|")
{
    const auto g = path_graph({2.0, 1.0});
    const auto f = factor_of(g, 1e-3);
    const SeedSet seeds({0, 1}, {2});
    const auto lp = assemble_compact_lp(f, seeds);
    CHECK(lp.variable_count() == 6);
    const auto s = solve_lp(lp);
    REQUIRE(s.status == LpStatus::Optimal);
    const auto ul = f.apply(std::vector<double>{1, 1, 0});
    for (int k = 0; k < 3; ++k) CHECK(s.x[3 + k] == doctest::Approx(std::abs(ul[k])).epsilon(1e-7));
}

TEST_CASE("compact LP on the weighted chain thresholds to (1, 1, 0)")
{
    const auto g = path_graph({2.0, 1.0});
    const SeedSet seeds({0}, {2});
    const auto r = solve_compact_lp(factor_of(g, 1e-8), seeds);
    check_seeds_exact(r.labels, seeds);
    CHECK(r.labels.values[1] >= 0.5);
    CHECK(r.labels.solver == Method::CompactLp);
    CHECK_FALSE(r.labels.binary);
    // Brute force: (1,1,0) costs 1, (1,0,0) costs 2.
    CHECK(boundary_energy(g, {1, 1, 0}, 1) < boundary_energy(g, {1, 0, 0}, 1));
}

TEST_CASE("conventional LP sizes and chain optimum")
{
    const auto g = path_graph({2.0, 1.0});
    const SeedSet seeds({0}, {2});
    const auto lp = assemble_conventional_lp(g, seeds);
    CHECK(lp.variable_count() == 5);
    CHECK(lp.row_count() == 4);
    const auto r = solve_conventional_lp(g, seeds);
    CHECK(r.lp.objective == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(r.labels.values[1] == doctest::Approx(1.0).epsilon(1e-6));
    check_seeds_exact(r.labels, seeds);
}

TEST_CASE("conventional LP decomposes over disconnected seeded pairs")
{
    const auto g = two_chains();
    const SeedSet seeds({0, 5}, {2, 3});
    const auto whole = solve_conventional_lp(g, seeds);
    const auto left = solve_conventional_lp(path_graph({2.0, 1.0}), SeedSet({0}, {2}));
    const auto right = solve_conventional_lp(path_graph({1.0, 3.0}), SeedSet({2}, {0}));
    CHECK(whole.lp.objective ==
          doctest::Approx(left.lp.objective + right.lp.objective).epsilon(1e-7));
    CHECK(whole.labels.values[1] == doctest::Approx(left.labels.values[1]).epsilon(1e-6));
    CHECK(whole.labels.values[4] == doctest::Approx(right.labels.values[1]).epsilon(1e-6));
}

TEST_CASE("conventional LP accepts a unary term")
{
    const auto g = path_graph({1.0, 1.0});
    // Node 1 strongly prefers background despite the seeds.
    const UnaryTerm unary{{0.0, 30.0, 0.0}, 1.0};
    const auto r = solve_conventional_lp(g, SeedSet({0}, {2}), {}, unary);
    CHECK(r.labels.values[1] == doctest::Approx(0.0).epsilon(1e-6).scale(1.0));
    const auto gc = solve_graph_cut(g, SeedSet({0}, {2}), unary);
    CHECK(gc.labels.values[1] == 0.0);
}

TEST_CASE("random walker on a unit chain gives one half")
{
    const auto g = path_graph({1.0, 1.0});
    const auto w = build_wtilde(build_incidence(g), 0.0);
    const auto f = solve_random_walker(w, SeedSet({0}, {2}));
    CHECK(f.values[1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(f.solver == Method::Qp);
}

TEST_CASE("random walker star with all leaves foreground")
{
    std::vector<FeatureVector> feat(5, FeatureVector{0.0});
    const SuperpixelGraph g(5, feat, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}, {0.3, 1.0, 2.0, 0.7});
    const auto w = build_wtilde(build_incidence(g), 0.0);
    const auto f = solve_random_walker(w, SeedSet({1, 2, 3, 4}, {}));
    CHECK(f.values[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("random walker rejects an unseeded component")
{
    const auto g = two_chains();
    const auto w = build_wtilde(build_incidence(g), 0.0);
    try {
        solve_random_walker(w, SeedSet({0}, {2}));
        FAIL("expected UnseededComponentError");
    } catch (const UnseededComponentError& e) {
        CHECK(e.component() == 3);
    }
}

TEST_CASE("random walker is harmonic and within the seed hull")
{
    std::mt19937_64 rng(79);
    for (int inst = 0; inst < 20; ++inst) {
        const auto g = random_connected_graph(12, 0.3, rng);
        const auto seeds = random_seeds(12, 4, rng);
        const auto w = build_wtilde(build_incidence(g), 0.0);
        const auto f = solve_random_walker(w, seeds);
        check_seeds_exact(f, seeds);
        const auto r = reduce_by_seeds(w.matrix(), seeds);
        std::vector<double> xu;
        for (int i : r.free_nodes) xu.push_back(f.values[i]);
        const auto ax = r.matrix.multiply(xu);
        double res = 0.0;
        for (std::size_t k = 0; k < ax.size(); ++k) res = std::max(res, std::abs(ax[k] - r.rhs[k]));
        CHECK(res <= 1e-8);
        for (double v : f.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(verify_harmonic(g, seeds, f.values).pass);
    }
}

TEST_CASE("graph cut on the weighted chain")
{
    const auto g = path_graph({2.0, 1.0});
    const auto r = solve_graph_cut(g, SeedSet({0}, {2}));
    CHECK(r.labels.values == std::vector<double>{1, 1, 0});
    CHECK(r.cut == doctest::Approx(1.0));
    CHECK(r.flow == doctest::Approx(1.0));
    CHECK(r.labels.binary);
}

TEST_CASE("graph cut with only foreground seeds labels the component 1")
{
    std::mt19937_64 rng(83);
    const auto g = random_connected_graph(7, 0.5, rng);
    const auto r = solve_graph_cut(g, SeedSet({2}, {}));
    CHECK(r.cut == 0.0);
    for (double v : r.labels.values) CHECK(v == 1.0);
}

TEST_CASE("graph cut matches exhaustive enumeration")
{
    std::mt19937_64 rng(89);
    for (int inst = 0; inst < 60; ++inst) {
        const int n = 3 + inst % 10;
        const auto g = random_connected_graph(n, std::min(1.0, 3.0 / (n - 1) + 0.1), rng);
        const auto seeds = random_seeds(n, std::max(2, n / 3), rng);
        const auto r = solve_graph_cut(g, seeds);
        check_seeds_exact(r.labels, seeds);
        const double best = brute_force(g, seeds);
        const double e = boundary_energy(g, r.labels.values, 1);
        CHECK(std::abs(e - best) <= 1e-12 * std::max(1.0, best));
        CHECK(r.flow == doctest::Approx(r.cut).epsilon(1e-12));
    }
}

TEST_CASE("conventional LP rounded at one half attains the min-cut energy")
{
    std::mt19937_64 rng(97);
    for (int inst = 0; inst < 40; ++inst) {
        const int n = 3 + inst % 10;
        const auto g = random_connected_graph(n, std::min(1.0, 3.0 / (n - 1) + 0.1), rng);
        const auto seeds = random_seeds(n, std::max(2, n / 3), rng);
        const auto lp = solve_conventional_lp(g, seeds);
        check_seeds_exact(lp.labels, seeds);
        std::vector<double> rounded;
        for (double v : lp.labels.values) rounded.push_back(v >= 0.5 ? 1.0 : 0.0);
        const double best = brute_force(g, seeds);
        CHECK(std::abs(boundary_energy(g, rounded, 1) - best) <= 1e-6 * std::max(1.0, best));
        CHECK(lp.lp.objective == doctest::Approx(best).epsilon(1e-6));
    }
}

TEST_CASE("all solvers keep labels in range and seeds exact")
{
    std::mt19937_64 rng(101);
    for (int inst = 0; inst < 10; ++inst) {
        const auto g = random_grid_graph(4, 5, rng);
        const auto seeds = random_seeds(20, 5, rng);
        const auto w = build_wtilde(build_incidence(g), 0.0);
        const auto f = cholesky_upper(build_wtilde(build_incidence(g), default_epsilon(w)));
        const std::vector<LabelField> fields{solve_compact_lp(f, seeds).labels,
                                             solve_conventional_lp(g, seeds).labels,
                                             solve_random_walker(w, seeds),
                                             solve_graph_cut(g, seeds).labels};
        for (const auto& field : fields) {
            check_seeds_exact(field, seeds);
            for (double v : field.values) {
                CHECK(v >= -1e-9);
                CHECK(v <= 1.0 + 1e-9);
            }
        }
    }
}

TEST_CASE("result JSON layout")
{
    const auto g = path_graph({2.0, 1.0});
    const auto f = factor_of(g, 1e-8);
    const LabelField field{{1.0, 0.6, 0.0}, Method::Qp, false};
    const auto j = result_json(field, energy_report(g, field.values, &f), 0.7);
    CHECK(j["solver"] == "qp");
    CHECK(j["threshold"] == 0.7);
    CHECK(j["labels"].size() == 3);
    CHECK(j["binary"] == nlohmann::json::array({1, 0, 0}));
    CHECK(j["energy"].contains("l1"));
    CHECK(j["energy"].contains("l2"));
    CHECK(j["energy"].contains("l1plus"));
}

TEST_CASE("max-flow on a textbook network")
{
    // s->0 (3), s->1 (2), 0->1 (1), 0->t (2), 1->t (3): max flow 5.
    MaxFlowGraph m(2);
    m.add_terminal(0, 3.0, 2.0);
    m.add_terminal(1, 2.0, 3.0);
    m.add_edge(0, 1, 1.0, 0.0);
    CHECK(m.solve() == doctest::Approx(5.0));
    CHECK(m.cut_value() == doctest::Approx(5.0));
}

TEST_CASE("max-flow equals brute-force min cut")
{
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int inst = 0; inst < 50; ++inst) {
        const int n = 2 + inst % 9;
        std::vector<double> src(n), snk(n);
        std::vector<std::array<double, 4>> arcs;
        MaxFlowGraph m(n);
        for (int i = 0; i < n; ++i) {
            src[i] = u(rng) < 0.5 ? u(rng) : 0.0;
            snk[i] = u(rng) < 0.5 ? u(rng) : 0.0;
            m.add_terminal(i, src[i], snk[i]);
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (u(rng) < 0.4) {
                    const double a = u(rng), b = u(rng);
                    arcs.push_back({double(i), double(j), a, b});
                    m.add_edge(i, j, a, b);
                }
        const double flow = m.solve();
        double best = 1e300;
        for (int mask = 0; mask < (1 << n); ++mask) {
            double cut = 0.0;
            for (int i = 0; i < n; ++i) cut += (mask >> i & 1) ? snk[i] : src[i];
            for (const auto& a : arcs) {
                const bool si = mask >> int(a[0]) & 1, sj = mask >> int(a[1]) & 1;
                if (si && !sj) cut += a[2];
                if (sj && !si) cut += a[3];
            }
            best = std::min(best, cut);
        }
        CHECK(flow == doctest::Approx(best).epsilon(1e-12));
        CHECK(m.cut_value() == doctest::Approx(best).epsilon(1e-12));
    }
}
