#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mrflp/diagnostics.hpp"
#include "mrflp/errors.hpp"
#include "mrflp/graph.hpp"
#include "mrflp/seeds.hpp"
#include "test_support.hpp"

using namespace mrflp;
using mrflp::test::dense_wtilde;
using mrflp::test::path_graph;
using mrflp::test::random_vector;

TEST_CASE("edge weight of identical features is 1 + c")
{
    const std::vector<Edge> edges{{0, 1}};
    const std::vector<FeatureVector> f{{0.3, 0.2, 0.9}, {0.3, 0.2, 0.9}};
    const auto w = compute_edge_weights(edges, f, 0.00001);
    CHECK(w[0] == doctest::Approx(1.00001).epsilon(1e-15));
}

TEST_CASE("edge weight at unit squared difference and c = 0 is one half")
{
    const std::vector<Edge> edges{{0, 1}};
    const std::vector<FeatureVector> f{{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
    CHECK(compute_edge_weights(edges, f, 0.0)[0] == 0.5);
}

TEST_CASE("edge weights match direct evaluation on random features")
{
    std::mt19937_64 rng(7);
    std::vector<FeatureVector> f;
    for (int i = 0; i < 5; ++i) f.push_back(random_vector(3, rng));
    const std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 3}, {3, 4}};
    const double c = 0.00001;
    const auto w = compute_edge_weights(edges, f, c);
    for (std::size_t k = 0; k < edges.size(); ++k) {
        double d2 = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
            const double d = f[edges[k].u][ch] - f[edges[k].v][ch];
            d2 += d * d;
        }
        CHECK(w[k] == doctest::Approx(1.0 / (1.0 + d2) + c).epsilon(1e-15));
        CHECK(w[k] > c);
        CHECK(w[k] <= 1.0 + c);
    }
}

TEST_CASE("edge weights reject non-finite features")
{
    const std::vector<Edge> edges{{0, 1}};
    const std::vector<FeatureVector> f{{0.0}, {std::numeric_limits<double>::quiet_NaN()}};
    CHECK_THROWS_AS(compute_edge_weights(edges, f, 0.1), InvalidInputError);
    const std::vector<FeatureVector> g{{0.0}, {INFINITY}};
    CHECK_THROWS_AS(compute_edge_weights(edges, g, 0.1), InvalidInputError);
}

TEST_CASE("graph construction validates invariants")
{
    const std::vector<FeatureVector> f(3, FeatureVector{0.0});
    CHECK_NOTHROW(SuperpixelGraph(3, f, {{0, 1}, {1, 2}}, {1.0, 1.0}));
    CHECK_THROWS_AS(SuperpixelGraph(3, f, {{1, 0}}, {1.0}), InvalidInputError);
    CHECK_THROWS_AS(SuperpixelGraph(3, f, {{1, 1}}, {1.0}), InvalidInputError);
    CHECK_THROWS_AS(SuperpixelGraph(3, f, {{0, 3}}, {1.0}), InvalidInputError);
    CHECK_THROWS_AS(SuperpixelGraph(3, f, {{0, 1}, {0, 1}}, {1.0, 1.0}), InvalidInputError);
    CHECK_THROWS_AS(SuperpixelGraph(3, f, {{0, 1}}, {0.0}), InvalidInputError);
    CHECK_THROWS_AS(SuperpixelGraph(3, f, {{0, 1}}, {1.0, 2.0}), InvalidInputError);
}

TEST_CASE("graph JSON round trip")
{
    std::mt19937_64 rng(3);
    const auto g = random_connected_graph(9, 0.4, rng);
    const auto j = g.to_json();
    CHECK(j["n"] == 9);
    const auto back = SuperpixelGraph::from_json(j);
    CHECK(back.node_count() == g.node_count());
    CHECK(back.edges() == g.edges());
    CHECK(back.weights() == g.weights());
    CHECK(back.features() == g.features());
}

TEST_CASE("graph JSON rejects non-canonical edges")
{
    nlohmann::json j = {{"n", 2},
                        {"features", {{0.0}, {1.0}}},
                        {"edges", {{1, 0}}},
                        {"weights", {1.0}}};
    CHECK_THROWS_AS(SuperpixelGraph::from_json(j), InvalidInputError);
}

TEST_CASE("components are numbered by smallest member")
{
    const std::vector<FeatureVector> f(5, FeatureVector{0.0});
    const SuperpixelGraph g(5, f, {{1, 3}, {0, 4}}, {1.0, 1.0});
    CHECK(g.components() == std::vector<int>{0, 1, 2, 1, 0});
}

TEST_CASE("incidence of a single edge")
{
    const auto inc = build_incidence(path_graph({1.0}));
    REQUIRE(inc.row_count() == 1);
    const auto d = inc.weighted_matrix().to_dense();
    CHECK(d(0, 0) == 1.0);
    CHECK(d(0, 1) == -1.0);
    CHECK(inc.weights[0] == 1.0);
}

TEST_CASE("incidence of a path")
{
    const auto inc = build_incidence(path_graph({1.0, 1.0}));
    REQUIRE(inc.row_count() == 2);
    Eigen::MatrixXd expected(2, 3);
    expected << 1, -1, 0, 0, 1, -1;
    CHECK(inc.weighted_matrix().to_dense() == expected);
}

TEST_CASE("incidence of an edgeless graph has no rows")
{
    const SuperpixelGraph g(4, std::vector<FeatureVector>(4, FeatureVector{0.0}), {}, {});
    const auto inc = build_incidence(g);
    CHECK(inc.row_count() == 0);
    CHECK(inc.weighted_matrix().rows() == 0);
    CHECK(inc.weighted_matrix().cols() == 4);
}

TEST_CASE("incidence rows sum to zero with two nonzeros")
{
    std::mt19937_64 rng(11);
    const auto g = random_connected_graph(12, 0.3, rng);
    const auto inc = build_incidence(g);
    const auto d = inc.weighted_matrix().to_dense();
    for (int k = 0; k < inc.row_count(); ++k) {
        const double w = inc.weights[k];
        CHECK(d.row(k).sum() == doctest::Approx(0.0));
        CHECK((d.row(k).array() != 0.0).count() == 2);
        CHECK(d(k, inc.rows[k].u) == w);
        CHECK(d(k, inc.rows[k].v) == -w);
    }
}

TEST_CASE("smoothness matrix of a unit path")
{
    const auto g = path_graph({1.0, 1.0});
    const auto w = build_wtilde(build_incidence(g), 0.0);
    Eigen::MatrixXd expected(3, 3);
    expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    CHECK(w.matrix().to_dense() == expected);

    std::mt19937_64 rng(5);
    for (int t = 0; t < 100; ++t) {
        const auto l = random_vector(3, rng, -1.0, 1.0);
        const double direct = (l[0] - l[1]) * (l[0] - l[1]) + (l[1] - l[2]) * (l[1] - l[2]);
        CHECK(w.quadratic_form(l) == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("smoothness matrix of a single isolated node is epsilon")
{
    const SuperpixelGraph g(1, {FeatureVector{0.5}}, {}, {});
    const auto w = build_wtilde(build_incidence(g), 0.01);
    CHECK(w.matrix().to_dense()(0, 0) == 0.01);
    CHECK(w.epsilon() == 0.01);
}

TEST_CASE("smoothness matrix quadratic form equals the edge sum")
{
    std::mt19937_64 rng(17);
    for (int inst = 0; inst < 10; ++inst) {
        const auto g = random_connected_graph(8, 0.4, rng);
        const double eps = 0.001 * inst;
        const auto inc = build_incidence(g);
        const auto w = build_wtilde(inc, eps);
        CHECK((w.matrix().to_dense() - dense_wtilde(g, eps)).cwiseAbs().maxCoeff() <= 1e-15);
        for (int t = 0; t < 20; ++t) {
            const auto l = random_vector(8, rng, -1.0, 1.0);
            double direct = 0.0, norm2 = 0.0;
            for (int k = 0; k < g.edge_count(); ++k) {
                const double d = l[g.edges()[k].u] - l[g.edges()[k].v];
                direct += g.weights()[k] * g.weights()[k] * d * d;
            }
            for (double v : l) norm2 += v * v;
            const double expected = direct + eps * norm2;
            CHECK(std::abs(w.quadratic_form(l) - expected) <= 1e-12 * std::max(1.0, expected));

            const auto grad = inc.weighted_gradient(l);
            double via_incidence = 0.0;
            for (double v : grad) via_incidence += v * v;
            CHECK(std::abs(via_incidence - direct) <= 1e-12 * std::max(1.0, direct));
        }
    }
}

TEST_CASE("smoothness matrix is symmetric, diagonally dominant and PSD")
{
    std::mt19937_64 rng(23);
    for (int inst = 0; inst < 30; ++inst) {
        const int n = 2 + inst % 40;
        const auto g = random_connected_graph(n, std::min(1.0, 3.0 / n + 0.1), rng);
        const auto w = build_wtilde(build_incidence(g), 0.0).matrix().to_dense();
        CHECK(w == w.transpose());
        for (int i = 0; i < n; ++i) {
            double off = 0.0;
            for (int j = 0; j < n; ++j)
                if (j != i) off += std::abs(w(i, j));
            CHECK(w(i, i) >= 0.0);
            CHECK(w(i, i) >= off - 1e-15 * w(i, i));
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8 * std::max(1.0, w.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("default epsilon scales with the largest diagonal")
{
    const auto w = build_wtilde(build_incidence(path_graph({2.0, 1.0})), 0.0);
    CHECK(default_epsilon(w) == doctest::Approx(4e-8));
    const SuperpixelGraph lone(2, std::vector<FeatureVector>(2, FeatureVector{0.0}), {}, {});
    CHECK(default_epsilon(build_wtilde(build_incidence(lone), 0.0)) == 1e-8);
}

TEST_CASE("seed set validation")
{
    CHECK_THROWS_AS(SeedSet({1, 2}, {2}), InvalidInputError);
    const SeedSet s({3, 1, 3}, {0});
    CHECK(s.foreground() == std::vector<int>{1, 3});
    CHECK(s.value_of(3) == 1.0);
    CHECK(s.value_of(0) == 0.0);
    CHECK_FALSE(s.value_of(2).has_value());
    CHECK_NOTHROW(s.validate(4, true));
    CHECK_THROWS_AS(s.validate(3), InvalidInputError);
    CHECK_THROWS_AS(SeedSet({1}, {}).validate(4, true), InvalidInputError);
    CHECK_THROWS_AS(SeedSet({-1}, {0}).validate(4), InvalidInputError);
}

TEST_CASE("reduce_by_seeds on a chain keeps only the middle node")
{
    const auto w = build_wtilde(build_incidence(path_graph({2.0, 1.0})), 0.0);
    const auto r = reduce_by_seeds(w.matrix(), SeedSet({0}, {2}));
    CHECK(r.free_nodes == std::vector<int>{1});
    CHECK(r.matrix.rows() == 1);
    CHECK(r.matrix.to_dense()(0, 0) == 5.0);
    CHECK(r.rhs[0] == 4.0);
    const auto full = r.expand(std::vector<double>{0.8});
    CHECK(full == std::vector<double>{1.0, 0.8, 0.0});
}

TEST_CASE("reduce_by_seeds with every node seeded returns the seeds")
{
    const auto w = build_wtilde(build_incidence(path_graph({1.0, 1.0})), 0.0);
    try {
        reduce_by_seeds(w.matrix(), SeedSet({0, 1}, {2}));
        FAIL("expected DegenerateProblemError");
    } catch (const DegenerateProblemError& e) {
        CHECK(e.labels() == std::vector<double>{1.0, 1.0, 0.0});
    }
}

TEST_CASE("reduced solve equals the equality-constrained KKT solve")
{
    std::mt19937_64 rng(29);
    for (int inst = 0; inst < 20; ++inst) {
        const int n = 10;
        const auto g = random_connected_graph(n, 0.35, rng);
        const auto seeds = SeedSet({inst % n}, {(inst + 3) % n, (inst + 7) % n});
        const auto w = build_wtilde(build_incidence(g), 0.0);
        const auto r = reduce_by_seeds(w.matrix(), seeds);
        const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(r.rhs.data(), r.rhs.size());
        const Eigen::VectorXd xu = r.matrix.to_dense().ldlt().solve(rhs);
        const auto x = r.expand(std::vector<double>(xu.data(), xu.data() + xu.size()));

        // min x^T W x  s.t.  x_s = seed values, via the full KKT system.
        const int m = seeds.size();
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + m, n + m);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n + m);
        kkt.topLeftCorner(n, n) = 2.0 * dense_wtilde(g, 0.0);
        int row = n;
        for (int s : seeds.foreground()) {
            kkt(row, s) = kkt(s, row) = 1.0;
            b(row++) = 1.0;
        }
        for (int s : seeds.background()) {
            kkt(row, s) = kkt(s, row) = 1.0;
            b(row++) = 0.0;
        }
        const Eigen::VectorXd sol = kkt.fullPivLu().solve(b);
        for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(sol(i)).epsilon(1e-9));
    }
}
