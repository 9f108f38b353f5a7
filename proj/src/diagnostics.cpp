#include "mrflp/diagnostics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "mrflp/cholesky.hpp"
#include "mrflp/errors.hpp"

namespace mrflp {

namespace {

double positive_uniform(std::mt19937_64& rng)
{
    // Uniform on (0, 1].
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return 1.0 - u(rng);
}

double vector_l1(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

double vector_l2(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

/// [diag(w) D L ; sqrt(eps) L]
std::vector<double> augmented_gradient(const IncidenceOperator& inc, double eps,
                                       const std::vector<double>& labels)
{
    auto g = inc.weighted_gradient(labels);
    if (eps > 0.0) {
        const double s = std::sqrt(eps);
        for (double x : labels) g.push_back(s * x);
    }
    return g;
}

std::vector<double> random_labels(int n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> l(n);
    for (double& x : l) x = u(rng);
    return l;
}

}  // namespace

SuperpixelGraph random_connected_graph(int n, double p, std::mt19937_64& rng)
{
    if (n < 1) throw InvalidInputError("random graph needs at least one node");
    if (!(p > 0.0 && p <= 1.0)) throw InvalidInputError("edge probability must lie in (0, 1]");
    std::bernoulli_distribution coin(p);
    for (;;) {
        std::vector<Edge> edges;
        for (int u = 0; u < n; ++u)
            for (int v = u + 1; v < n; ++v)
                if (coin(rng)) edges.push_back({u, v});
        std::vector<double> weights(edges.size());
        for (double& w : weights) w = positive_uniform(rng);
        SuperpixelGraph g(n, {}, std::move(edges), std::move(weights));
        const auto comp = g.components();
        if (std::all_of(comp.begin(), comp.end(), [](int c) { return c == 0; })) return g;
    }
}

SuperpixelGraph random_grid_graph(int rows, int cols, std::mt19937_64& rng)
{
    if (rows < 1 || cols < 1) throw InvalidInputError("grid dimensions must be positive");
    std::vector<Edge> edges;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int i = r * cols + c;
            if (c + 1 < cols) edges.push_back({i, i + 1});
            if (r + 1 < rows) edges.push_back({i, i + cols});
        }
    }
    std::vector<double> weights(edges.size());
    for (double& w : weights) w = positive_uniform(rng);
    return SuperpixelGraph(rows * cols, {}, std::move(edges), std::move(weights));
}

SeedSet random_seeds(int n, int max_seeds, std::mt19937_64& rng)
{
    if (n < 2 || max_seeds < 2) throw InvalidInputError("random seeds need n >= 2 and max_seeds >= 2");
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const int total = std::uniform_int_distribution<int>(2, std::min(max_seeds, n))(rng);
    const int fg = std::uniform_int_distribution<int>(1, total - 1)(rng);
    std::vector<int> f(order.begin(), order.begin() + fg);
    std::vector<int> b(order.begin() + fg, order.begin() + total);
    return SeedSet(std::move(f), std::move(b));
}

// ---- PSD ----

nlohmann::json PsdReport::to_json() const
{
    return {{"check", "psd"},        {"dimension", dimension}, {"min_eigenvalue", min_eigenvalue},
            {"scale", scale},        {"method", method},       {"pass", pass}};
}

PsdReport verify_psd(const SparseMatrix& w, std::uint64_t seed)
{
    if (w.rows() != w.cols()) throw InvalidInputError("verify_psd: matrix must be square");
    PsdReport r;
    r.dimension = w.rows();
    r.scale = w.max_abs();
    const double tol = 1e-8 * r.scale;
    const int n = r.dimension;
    if (n <= kDensePsdLimit) {
        const Eigen::MatrixXd dense = w.to_dense();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense, Eigen::EigenvaluesOnly);
        r.min_eigenvalue = n > 0 ? eig.eigenvalues().minCoeff() : 0.0;
        r.method = "dense";
        r.pass = r.min_eigenvalue >= -tol;
        return r;
    }

    // rho bounds every |lambda| (Gershgorin), so rho I - W is PSD and its
    // dominant eigenvalue is rho - lambda_min. Power iteration from a random start.
    std::vector<double> row_sum(n, 0.0);
    for (int j = 0; j < n; ++j)
        for (int k = w.col_ptr()[j]; k < w.col_ptr()[j + 1]; ++k) row_sum[w.row_idx()[k]] += std::abs(w.values()[k]);
    const double rho = *std::max_element(row_sum.begin(), row_sum.end());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x(n);
    for (double& v : x) v = g(rng);
    double top = 0.0;
    for (int it = 0; it < 2000; ++it) {
        const double nx = vector_l2(x);
        if (nx == 0.0) break;
        for (double& v : x) v /= nx;
        auto y = w.multiply(x);
        double dot = 0.0;
        for (int i = 0; i < n; ++i) {
            y[i] = rho * x[i] - y[i];
            dot += x[i] * y[i];
        }
        top = dot;
        x = std::move(y);
    }
    r.min_eigenvalue = rho - top;
    r.method = "randomized";

    std::vector<Triplet> t;
    for (int j = 0; j < n; ++j) {
        for (int k = w.col_ptr()[j]; k < w.col_ptr()[j + 1]; ++k)
            t.push_back({w.row_idx()[k], j, w.values()[k]});
        t.push_back({j, j, tol > 0.0 ? tol : 1e-300});
    }
    const auto shifted = SparseMatrix::from_triplets(n, n, t);
    try {
        SparseCholesky chol(shifted, minimum_degree_ordering(shifted));
        chol.factorize(shifted, PivotPolicy::Throw);
        r.pass = true;
    } catch (const SingularMatrixError&) {
        r.pass = false;
    }
    return r;
}

// ---- factorization identity ----

nlohmann::json FactorizationReport::to_json() const
{
    return {{"check", "factorization"},
            {"dimension", dimension},
            {"epsilon", epsilon},
            {"max_u_minus_r", max_u_minus_r},
            {"relative_residual", relative_residual},
            {"pass", pass}};
}

FactorizationReport verify_factorization(const SuperpixelGraph& graph, double epsilon)
{
    FactorizationReport r;
    r.dimension = graph.node_count();
    r.epsilon = epsilon;
    const auto inc = build_incidence(graph);
    const auto wt = build_wtilde(inc, epsilon);
    const auto factor = cholesky_upper(wt);
    const auto qr = qr_reference(inc.weighted_matrix(), epsilon);
    r.max_u_minus_r = (factor.to_dense() - qr.r).cwiseAbs().maxCoeff();
    r.relative_residual = factor.relative_residual(wt);
    r.pass = r.max_u_minus_r <= kFactorIdentityTol && r.relative_residual <= kFactorResidualTol;
    return r;
}

// ---- corollaries ----

nlohmann::json CorollaryReport::to_json() const
{
    return {{"check", "corollaries"},
            {"trials", trials},
            {"max_l2_relative_error", max_l2_relative_error},
            {"max_transform_error", max_transform_error},
            {"pass", pass}};
}

CorollaryReport verify_corollaries(const SuperpixelGraph& graph, double epsilon, int trials,
                                   std::mt19937_64& rng)
{
    CorollaryReport r;
    r.trials = trials;
    const auto inc = build_incidence(graph);
    const auto factor = cholesky_upper(build_wtilde(inc, epsilon));
    const auto qr = qr_reference(inc.weighted_matrix(), epsilon);
    const int n = graph.node_count();
    for (int t = 0; t < trials; ++t) {
        const auto l = random_labels(n, rng);
        const auto ul = factor.apply(l);
        const auto al = augmented_gradient(inc, epsilon, l);
        const double ref = vector_l2(al);
        const double err = std::abs(vector_l2(ul) - ref) / std::max(ref, 1e-300);
        r.max_l2_relative_error = std::max(r.max_l2_relative_error, err);

        const Eigen::Map<const Eigen::VectorXd> av(al.data(), static_cast<Eigen::Index>(al.size()));
        const Eigen::VectorXd qta = qr.q.q.transpose() * av;
        for (int i = 0; i < n; ++i)
            r.max_transform_error = std::max(r.max_transform_error, std::abs(ul[i] - qta[i]));
    }
    r.pass = r.max_l2_relative_error <= kCorollaryL2Tol &&
             r.max_transform_error <= kCorollaryTransformTol;
    return r;
}

// ---- norm bounds ----

nlohmann::json NormBoundReport::to_json() const
{
    return {{"check", "norm_bounds"},
            {"trials", trials},
            {"q_l1", q_l1},
            {"qt_l1", qt_l1},
            {"sandwich_violations", sandwich_violations},
            {"classical_violations", classical_violations},
            {"worst_sandwich_margin", worst_sandwich_margin},
            {"worst_classical_margin", worst_classical_margin},
            {"pass", pass}};
}

NormBoundReport verify_norm_bounds(const SuperpixelGraph& graph, const FactorU& factor,
                                   const OrthogonalFactor& q, int trials, std::mt19937_64& rng)
{
    NormBoundReport r;
    r.trials = trials;
    r.q_l1 = q.l1_norm();
    r.qt_l1 = q.transpose_l1_norm();
    r.worst_sandwich_margin = INFINITY;
    r.worst_classical_margin = INFINITY;
    const auto inc = build_incidence(graph);
    const double eps = factor.epsilon();
    const int n = graph.node_count();
    for (int t = 0; t < trials; ++t) {
        const auto l = random_labels(n, rng);
        const double a1 = vector_l1(augmented_gradient(inc, eps, l));
        const double u1 = vector_l1(factor.apply(l));
        const double lower = a1 / r.q_l1, upper = r.qt_l1 * a1;
        const double slack = kNormBoundSlack * std::max({1.0, upper, u1});
        const double margin = std::min(u1 - lower, upper - u1) + slack;
        r.worst_sandwich_margin = std::min(r.worst_sandwich_margin, margin);
        if (margin < 0.0) ++r.sandwich_violations;

        const auto x = inc.weighted_gradient(l);
        const double x1 = vector_l1(x), x2 = vector_l2(x);
        const double m = std::max<std::size_t>(x.size(), 1);
        const double cslack = kNormBoundSlack * std::max(1.0, x1);
        const double cmargin = std::min(x2 - x1 / std::sqrt(m), x1 - x2) + cslack;
        r.worst_classical_margin = std::min(r.worst_classical_margin, cmargin);
        if (cmargin < 0.0) ++r.classical_violations;
    }
    r.pass = r.sandwich_violations == 0 && r.classical_violations == 0;
    return r;
}

// ---- optimal-value sandwich ----

nlohmann::json SandwichReport::to_json() const
{
    return {{"check", "optimal_sandwich"},
            {"opt_conventional", opt_conventional},
            {"opt_compact", opt_compact},
            {"q_l1", q_l1},
            {"qt_l1", qt_l1},
            {"lower", lower},
            {"upper", upper},
            {"slack", slack},
            {"pass", pass}};
}

SandwichReport verify_optimal_sandwich(const SuperpixelGraph& graph, const SeedSet& seeds,
                                       double epsilon, const LpOptions& options)
{
    SandwichReport r;
    const auto inc = build_incidence(graph);
    const auto factor = cholesky_upper(build_wtilde(inc, epsilon));
    const auto q = recover_q(inc.weighted_matrix(), factor);
    r.q_l1 = q.l1_norm();
    r.qt_l1 = q.transpose_l1_norm();
    r.opt_conventional = solve_conventional_lp(graph, seeds, options).lp.objective;
    r.opt_compact = solve_compact_lp(factor, seeds, options).lp.objective;
    r.lower = r.opt_conventional / r.q_l1;
    r.upper = r.qt_l1 * r.opt_conventional;
    r.slack = kSandwichSlack * std::max(1.0, r.upper);
    r.pass = r.lower <= r.opt_compact + r.slack && r.opt_compact <= r.upper + r.slack;
    return r;
}

// ---- random walker harmonicity ----

nlohmann::json HarmonicReport::to_json() const
{
    return {{"check", "harmonic"},
            {"max_residual", max_residual},
            {"hull_violation", hull_violation},
            {"pass", pass}};
}

HarmonicReport verify_harmonic(const SuperpixelGraph& graph, const SeedSet& seeds,
                               const std::vector<double>& labels)
{
    const int n = graph.node_count();
    if (static_cast<int>(labels.size()) != n) throw InvalidInputError("verify_harmonic: size mismatch");
    std::vector<double> num(n, 0.0), den(n, 0.0);
    const auto& e = graph.edges();
    const auto& w = graph.weights();
    for (std::size_t k = 0; k < e.size(); ++k) {
        const double w2 = w[k] * w[k];
        num[e[k].u] += w2 * (labels[e[k].u] - labels[e[k].v]);
        num[e[k].v] += w2 * (labels[e[k].v] - labels[e[k].u]);
        den[e[k].u] += w2;
        den[e[k].v] += w2;
    }
    HarmonicReport r;
    double lo = INFINITY, hi = -INFINITY;
    if (!seeds.foreground().empty()) lo = std::min(lo, 1.0), hi = std::max(hi, 1.0);
    if (!seeds.background().empty()) lo = std::min(lo, 0.0), hi = std::max(hi, 0.0);
    for (int i = 0; i < n; ++i) {
        if (seeds.value_of(i)) {
            r.hull_violation = std::max(r.hull_violation, std::abs(labels[i] - *seeds.value_of(i)));
            continue;
        }
        if (den[i] > 0.0) r.max_residual = std::max(r.max_residual, std::abs(num[i]) / den[i]);
        if (std::isfinite(lo))
            r.hull_violation = std::max({r.hull_violation, lo - labels[i], labels[i] - hi});
    }
    r.pass = r.max_residual <= kHarmonicTol && r.hull_violation <= 1e-9;
    return r;
}

// ---- exactness ----

nlohmann::json ExactnessReport::to_json() const
{
    return {{"check", "exactness"},
            {"exhaustive_energy", exhaustive_energy},
            {"graph_cut_energy", graph_cut_energy},
            {"conventional_rounded_energy", conventional_rounded_energy},
            {"graph_cut_exact", graph_cut_exact},
            {"conventional_matches", conventional_matches},
            {"pass", pass}};
}

double exhaustive_min_energy(const SuperpixelGraph& graph, const SeedSet& seeds)
{
    const int n = graph.node_count();
    seeds.validate(n);
    std::vector<int> free;
    std::vector<double> labels(n, 0.0);
    for (int i = 0; i < n; ++i) {
        if (const auto v = seeds.value_of(i)) labels[i] = *v;
        else free.push_back(i);
    }
    if (static_cast<int>(free.size()) > kExhaustiveMaxFree)
        throw InvalidInputError("exhaustive_min_energy: too many free nodes");
    double best = INFINITY;
    const unsigned long long count = 1ULL << free.size();
    for (unsigned long long mask = 0; mask < count; ++mask) {
        for (std::size_t b = 0; b < free.size(); ++b) labels[free[b]] = (mask >> b) & 1ULL ? 1.0 : 0.0;
        best = std::min(best, boundary_energy(graph, labels, 1));
    }
    return best;
}

ExactnessReport verify_exactness(const SuperpixelGraph& graph, const SeedSet& seeds,
                                 const LpOptions& options)
{
    ExactnessReport r;
    r.exhaustive_energy = exhaustive_min_energy(graph, seeds);
    const auto gc = solve_graph_cut(graph, seeds);
    r.graph_cut_energy = boundary_energy(graph, gc.labels.values, 1);
    const auto lp = solve_conventional_lp(graph, seeds, options);
    std::vector<double> rounded(lp.labels.values.size());
    for (std::size_t i = 0; i < rounded.size(); ++i) rounded[i] = lp.labels.values[i] >= 0.5 ? 1.0 : 0.0;
    r.conventional_rounded_energy = boundary_energy(graph, rounded, 1);
    // Graph cut and enumeration evaluate the same edge sum; only summation
    // order of tied labelings can differ.
    const double scale = std::max(1.0, r.exhaustive_energy);
    r.graph_cut_exact = std::abs(r.graph_cut_energy - r.exhaustive_energy) <= 1e-12 * scale;
    r.conventional_matches =
        std::abs(r.conventional_rounded_energy - r.exhaustive_energy) <= 1e-6 * scale;
    r.pass = r.graph_cut_exact && r.conventional_matches;
    return r;
}

// ---- sizes ----

nlohmann::json ProblemSizeReport::to_json() const
{
    auto size = [](const LpSize& s) {
        return nlohmann::json{{"variables", s.variables}, {"rows", s.rows}, {"bounds", s.bounds}};
    };
    return {{"nodes", nodes},
            {"edges", edges},
            {"compact", size(compact)},
            {"conventional", size(conventional)},
            {"worst_case", {{"compact", "O(N^3)"}, {"conventional", "O(N^6)"}}}};
}

ProblemSizeReport problem_size_report(long long nodes, long long edges)
{
    if (nodes < 0 || edges < 0) throw InvalidInputError("problem sizes must be non-negative");
    ProblemSizeReport r;
    r.nodes = nodes;
    r.edges = edges;
    // Labels carry [0, 1]; auxiliaries only a lower bound.
    r.compact = {2 * nodes, 2 * nodes, 3 * nodes};
    r.conventional = {nodes + edges, 2 * edges, 2 * nodes + edges};
    return r;
}

LpSize measure_lp_size(const LpProblem& p)
{
    LpSize s;
    s.variables = p.variable_count();
    s.rows = p.row_count();
    for (int j = 0; j < p.variable_count(); ++j) {
        s.bounds += std::isfinite(p.lower()[j]);
        s.bounds += std::isfinite(p.upper()[j]);
    }
    return s;
}

// ---- timing ----

std::vector<TimingRow> timing_bench(const std::vector<int>& sizes, int repetitions,
                                    std::uint64_t seed, const std::vector<Method>& methods,
                                    const LpOptions& options)
{
    if (repetitions < 1) throw InvalidInputError("timing_bench: repetitions must be at least 1");
    std::vector<TimingRow> rows;
    for (int n : sizes) {
        if (n < 4 || n > 2000) throw InvalidInputError("timing_bench: sizes must lie in [4, 2000]");
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(n));
        int r = static_cast<int>(std::floor(std::sqrt(static_cast<double>(n))));
        while (n % r != 0) --r;
        const auto graph = random_grid_graph(r, n / r, rng);
        const auto seeds = random_seeds(n, std::max(2, n / 20), rng);
        const auto inc = build_incidence(graph);
        const auto w0 = build_wtilde(inc, 0.0);
        const auto factor = cholesky_upper(build_wtilde(inc, default_epsilon(w0)));
        for (Method m : methods) {
            TimingRow row{to_string(m), n, 0.0, {}};
            for (int rep = 0; rep < repetitions; ++rep) {
                const auto t0 = std::chrono::steady_clock::now();
                switch (m) {
                case Method::CompactLp: solve_compact_lp(factor, seeds, options); break;
                case Method::ConventionalLp: solve_conventional_lp(graph, seeds, options); break;
                case Method::Qp: solve_random_walker(w0, seeds); break;
                case Method::GraphCut: solve_graph_cut(graph, seeds); break;
                }
                const auto t1 = std::chrono::steady_clock::now();
                row.samples.push_back(std::chrono::duration<double>(t1 - t0).count());
            }
            auto sorted = row.samples;
            std::sort(sorted.begin(), sorted.end());
            const std::size_t k = sorted.size();
            row.median_seconds = k % 2 ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string timing_csv(const std::vector<TimingRow>& rows)
{
    std::ostringstream out;
    out.precision(9);
    out << "method,n,median_seconds\n";
    for (const auto& r : rows) out << r.method << ',' << r.n << ',' << r.median_seconds << '\n';
    return out.str();
}

// ---- suite ----

nlohmann::json verify_all(const VerifyOptions& o)
{
    std::mt19937_64 rng(o.seed);
    std::uniform_int_distribution<int> small(3, 12), medium(2, 30), large(2, 50);
    auto density = [&](int n) { return std::min(1.0, 3.0 / std::max(1, n - 1) + 0.1); };
    auto eps_for = [](const SuperpixelGraph& g) {
        return default_epsilon(build_wtilde(build_incidence(g), 0.0));
    };
    nlohmann::json out;
    bool all = true;

    auto summarize = [&](const char* name, std::vector<nlohmann::json> reports) {
        bool pass = true;
        nlohmann::json worst;
        for (auto& r : reports) {
            if (!r["pass"].get<bool>()) {
                pass = false;
                if (worst.is_null()) worst = r;
            }
        }
        all = all && pass;
        out[name] = {{"instances", reports.size()}, {"pass", pass}};
        if (!worst.is_null()) out[name]["first_failure"] = worst;
    };

    {
        std::vector<nlohmann::json> reps;
        for (int i = 0; i < o.psd_instances; ++i) {
            const int n = large(rng);
            const auto g = random_connected_graph(n, density(n), rng);
            reps.push_back(verify_psd(build_wtilde(build_incidence(g), 0.0).matrix(), o.seed).to_json());
        }
        summarize("psd", std::move(reps));
    }
    {
        std::vector<nlohmann::json> fac, cor;
        for (int i = 0; i < o.factor_instances; ++i) {
            const int n = medium(rng);
            const auto g = random_connected_graph(n, density(n), rng);
            fac.push_back(verify_factorization(g, eps_for(g)).to_json());
            cor.push_back(verify_corollaries(g, eps_for(g), o.trials, rng).to_json());
        }
        summarize("factorization", std::move(fac));
        summarize("corollaries", std::move(cor));
    }
    {
        std::vector<nlohmann::json> reps;
        for (int i = 0; i < o.norm_instances; ++i) {
            const int n = medium(rng);
            const auto g = random_connected_graph(n, density(n), rng);
            const auto inc = build_incidence(g);
            const auto factor = cholesky_upper(build_wtilde(inc, eps_for(g)));
            const auto q = recover_q(inc.weighted_matrix(), factor);
            reps.push_back(verify_norm_bounds(g, factor, q, o.trials, rng).to_json());
        }
        summarize("norm_bounds", std::move(reps));
    }
    {
        std::vector<nlohmann::json> exact, sandwich, harmonic, sizes;
        for (int i = 0; i < o.exactness_instances; ++i) {
            const int n = small(rng);
            const auto g = random_connected_graph(n, density(n), rng);
            const auto seeds = random_seeds(n, std::max(2, n / 3), rng);
            exact.push_back(verify_exactness(g, seeds, o.lp).to_json());
            sandwich.push_back(verify_optimal_sandwich(g, seeds, eps_for(g), o.lp).to_json());
            const auto rw = solve_random_walker(build_wtilde(build_incidence(g), 0.0), seeds);
            harmonic.push_back(verify_harmonic(g, seeds, rw.values).to_json());

            const auto expected = problem_size_report(n, g.edge_count());
            const auto factor = cholesky_upper(build_wtilde(build_incidence(g), eps_for(g)));
            const auto compact = measure_lp_size(assemble_compact_lp(factor, seeds));
            const auto conventional = measure_lp_size(assemble_conventional_lp(g, seeds));
            auto same = [](const LpSize& a, const LpSize& b) {
                return a.variables == b.variables && a.rows == b.rows && a.bounds == b.bounds;
            };
            auto report = expected.to_json();
            report["check"] = "problem_size";
            report["measured"] = {{"compact", {{"variables", compact.variables}, {"rows", compact.rows}}},
                                  {"conventional",
                                   {{"variables", conventional.variables}, {"rows", conventional.rows}}}};
            report["pass"] = same(compact, expected.compact) && same(conventional, expected.conventional);
            sizes.push_back(std::move(report));
        }
        summarize("exactness", std::move(exact));
        summarize("optimal_sandwich", std::move(sandwich));
        summarize("harmonic", std::move(harmonic));
        summarize("problem_size", std::move(sizes));
    }
    out["seed"] = o.seed;
    out["pass"] = all;
    return out;
}

}  // namespace mrflp
