#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mrflp/cholesky.hpp"
#include "mrflp/diagnostics.hpp"
#include "mrflp/errors.hpp"
#include "mrflp/factorization.hpp"
#include "test_support.hpp"

using namespace mrflp;
using mrflp::test::dense_wtilde;
using mrflp::test::path_graph;
using mrflp::test::random_vector;

namespace {

SmoothnessMatrix from_dense(const Eigen::MatrixXd& a, double eps = 0.0)
{
    return SmoothnessMatrix(SparseMatrix::from_dense(a), eps);
}

Eigen::MatrixXd augmented_dense(const SuperpixelGraph& g, double eps)
{
    return augmented_operator(build_incidence(g).weighted_matrix(), eps).to_dense();
}

}  // namespace

TEST_CASE("cholesky of a 2x2 tridiagonal matrix")
{
    Eigen::MatrixXd a(2, 2);
    a << 2, -1, -1, 2;
    const auto u = cholesky_upper(from_dense(a)).to_dense();
    CHECK(u(0, 0) == doctest::Approx(std::sqrt(2.0)));
    CHECK(u(0, 1) == doctest::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(u(1, 0) == 0.0);
    CHECK(u(1, 1) == doctest::Approx(std::sqrt(1.5)));
    CHECK(((u.transpose() * u) - a).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("cholesky of the identity is the identity")
{
    const auto u = cholesky_upper(from_dense(Eigen::MatrixXd::Identity(3, 3))).to_dense();
    CHECK(u == Eigen::MatrixXd::Identity(3, 3));
}

TEST_CASE("cholesky of a connected Laplacian fails at pivot 1")
{
    Eigen::MatrixXd a(2, 2);
    a << 1, -1, -1, 1;
    try {
        cholesky_upper(from_dense(a));
        FAIL("expected SingularMatrixError");
    } catch (const SingularMatrixError& e) {
        CHECK(e.index() == 1);
    }
}

TEST_CASE("cholesky residual and positive diagonal on random graphs")
{
    std::mt19937_64 rng(31);
    for (int inst = 0; inst < 25; ++inst) {
        const int n = 2 + inst * 3;
        const auto g = random_connected_graph(n, std::min(1.0, 3.0 / n + 0.1), rng);
        const auto w0 = build_wtilde(build_incidence(g), 0.0);
        const auto w = build_wtilde(build_incidence(g), default_epsilon(w0));
        const auto f = cholesky_upper(w);
        CHECK(f.relative_residual(w) <= 1e-10);
        const auto u = f.to_dense();
        for (int i = 0; i < n; ++i) CHECK(u(i, i) > 0.0);
        CHECK(u.triangularView<Eigen::StrictlyLower>().toDenseMatrix().isZero(0.0));
        const Eigen::MatrixXd target = dense_wtilde(g, w.epsilon());
        CHECK(((u.transpose() * u) - target).cwiseAbs().maxCoeff() <=
              1e-10 * target.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("fill-reducing order changes U but not U^T U")
{
    std::mt19937_64 rng(37);
    const auto g = random_grid_graph(6, 7, rng);
    const auto w = build_wtilde(build_incidence(g), 1e-6);
    const auto natural = cholesky_upper(w);
    const auto ordered = cholesky_upper(w, {.fill_reducing = true});
    CHECK_FALSE(natural.permuted());
    CHECK(ordered.permuted());
    CHECK(ordered.relative_residual(w) <= 1e-10);
    CHECK(ordered.nonzeros() <= natural.nonzeros());
    const auto a = natural.to_dense(), b = ordered.to_dense();
    CHECK(((a.transpose() * a) - (b.transpose() * b)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("factor apply, transpose and triangular solve agree with dense algebra")
{
    std::mt19937_64 rng(41);
    const auto g = random_connected_graph(15, 0.3, rng);
    const auto w = build_wtilde(build_incidence(g), 1e-3);
    for (bool fill : {false, true}) {
        const auto f = cholesky_upper(w, {.fill_reducing = fill});
        const auto u = f.to_dense();
        const auto x = random_vector(15, rng, -1.0, 1.0);
        const Eigen::VectorXd ex = Eigen::Map<const Eigen::VectorXd>(x.data(), 15);
        const Eigen::VectorXd ux = u * ex;
        const Eigen::VectorXd utx = u.transpose() * ex;
        const auto a = f.apply(x), b = f.apply_transpose(x), c = f.solve_transpose(x);
        const Eigen::VectorXd sol = u.transpose().fullPivLu().solve(ex);
        for (int i = 0; i < 15; ++i) {
            CHECK(a[i] == doctest::Approx(ux(i)).epsilon(1e-12));
            CHECK(b[i] == doctest::Approx(utx(i)).epsilon(1e-12));
            CHECK(c[i] == doctest::Approx(sol(i)).epsilon(1e-9));
        }
        for (int k = 0; k < 15; ++k) {
            const auto row = f.row(k);
            for (std::size_t e = 0; e < row.cols.size(); ++e)
                CHECK(row.values[e] == u(k, row.cols[e]));
        }
    }
}

TEST_CASE("coordinate dump lists every stored entry of U")
{
    Eigen::MatrixXd a(2, 2);
    a << 4, -2, -2, 5;
    const auto f = cholesky_upper(from_dense(a));
    std::ostringstream out;
    f.write_coordinates(out);
    std::istringstream in(out.str());
    int r, c;
    double v;
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(2, 2);
    int count = 0;
    while (in >> r >> c >> v) {
        CHECK(r <= c);
        u(r, c) = v;
        ++count;
    }
    CHECK(count == 3);
    CHECK((u - f.to_dense()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("sparse cholesky solve matches dense solve")
{
    std::mt19937_64 rng(43);
    const auto g = random_grid_graph(5, 5, rng);
    const auto w = build_wtilde(build_incidence(g), 0.1);
    const auto perm = minimum_degree_ordering(w.matrix());
    SparseCholesky chol(w.matrix(), perm);
    chol.factorize(w.matrix());
    const auto b = random_vector(25, rng);
    const auto x = chol.solve(b);
    const Eigen::VectorXd expected =
        w.matrix().to_dense().ldlt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), 25));
    for (int i = 0; i < 25; ++i) CHECK(x[i] == doctest::Approx(expected(i)).epsilon(1e-10));
}

TEST_CASE("minimum degree ordering is a deterministic permutation")
{
    std::mt19937_64 rng(47);
    const auto g = random_grid_graph(4, 6, rng);
    const auto w = build_wtilde(build_incidence(g), 0.0).matrix();
    const auto p = minimum_degree_ordering(w);
    auto sorted = p;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 24; ++i) CHECK(sorted[i] == i);
    CHECK(minimum_degree_ordering(w) == p);
}

TEST_CASE("qr of a single edge without augmentation is rank deficient")
{
    const auto wd = build_incidence(path_graph({1.0})).weighted_matrix();
    CHECK_THROWS_AS(qr_reference(wd, 0.0), RankDeficientError);
}

TEST_CASE("qr of a single edge with unit augmentation matches cholesky")
{
    const auto g = path_graph({1.0});
    const auto qr = qr_reference(build_incidence(g).weighted_matrix(), 1.0);
    const auto u = cholesky_upper(build_wtilde(build_incidence(g), 1.0)).to_dense();
    CHECK((qr.r - u).cwiseAbs().maxCoeff() <= 1e-12);
    const auto a = augmented_dense(g, 1.0);
    CHECK((qr.q.q * qr.r - a).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("cholesky factor equals sign-normalised QR factor")
{
    std::mt19937_64 rng(53);
    for (int inst = 0; inst < 20; ++inst) {
        const int n = 2 + inst % 29;
        const auto g = random_connected_graph(n, std::min(1.0, 3.0 / n + 0.1), rng);
        const double eps = 1e-8 * (1.0 + inst);
        const auto qr = qr_reference(build_incidence(g).weighted_matrix(), eps);
        const auto u = cholesky_upper(build_wtilde(build_incidence(g), eps)).to_dense();
        CHECK((qr.r - u).cwiseAbs().maxCoeff() <= 1e-8);
        for (int i = 0; i < n; ++i) CHECK(qr.r(i, i) > 0.0);
        const auto a = augmented_dense(g, eps);
        CHECK((qr.q.q * qr.r - a).cwiseAbs().maxCoeff() <= 1e-10);
    }
}

TEST_CASE("recover_q of the identity")
{
    const auto f = cholesky_upper(from_dense(Eigen::MatrixXd::Identity(3, 3)));
    const auto q = recover_q(SparseMatrix::identity(3), f);
    CHECK(q.q.rows() == 3);
    CHECK((q.q - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("recovered Q of a path is orthonormal")
{
    const auto g = path_graph({1.0, 1.0});
    const auto f = cholesky_upper(build_wtilde(build_incidence(g), 1e-4));
    const auto q = recover_q(build_incidence(g).weighted_matrix(), f);
    CHECK(q.q.rows() == 2 + 3);
    const Eigen::MatrixXd qtq = q.q.transpose() * q.q;
    CHECK((qtq - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((q.q * f.to_dense() - augmented_dense(g, 1e-4)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("U L equals Q^T applied to the augmented gradient")
{
    std::mt19937_64 rng(59);
    const auto g = random_connected_graph(8, 0.4, rng);
    const auto inc = build_incidence(g);
    const double eps = 1e-6;
    const auto f = cholesky_upper(build_wtilde(inc, eps));
    const auto q = recover_q(inc.weighted_matrix(), f);
    const auto a = augmented_dense(g, eps);
    for (int t = 0; t < 50; ++t) {
        const auto l = random_vector(8, rng, -1.0, 1.0);
        const Eigen::VectorXd el = Eigen::Map<const Eigen::VectorXd>(l.data(), 8);
        const Eigen::VectorXd rhs = q.q.transpose() * (a * el);
        const auto ul = f.apply(l);
        double err = 0.0;
        for (int i = 0; i < 8; ++i) err = std::max(err, std::abs(ul[i] - rhs(i)));
        CHECK(err <= 1e-8);
        CHECK(Eigen::Map<const Eigen::VectorXd>(ul.data(), 8).norm() ==
              doctest::Approx((a * el).norm()).epsilon(1e-10));
    }
}

TEST_CASE("induced l1 norms of Q are column and row sums")
{
    OrthogonalFactor q;
    q.q.resize(3, 2);
    q.q << 1, -2, 0.5, 0, -1, 1;
    CHECK(q.l1_norm() == 3.0);
    CHECK(q.transpose_l1_norm() == 3.0);
    q.q(0, 1) = -4;
    CHECK(q.l1_norm() == 5.0);
    CHECK(q.transpose_l1_norm() == 5.0);
    q.q(2, 0) = -3;
    CHECK(q.l1_norm() == 5.0);
    CHECK(q.transpose_l1_norm() == 5.0);
    q.q(1, 1) = 2;
    CHECK(q.l1_norm() == 7.0);
    CHECK(q.transpose_l1_norm() == 5.0);
}
