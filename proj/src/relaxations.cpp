#include "mrflp/relaxations.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mrflp/cholesky.hpp"
#include "mrflp/errors.hpp"
#include "mrflp/maxflow.hpp"
#include "mrflp/pipeline.hpp"

namespace mrflp {

std::string to_string(Method method)
{
    switch (method) {
    case Method::CompactLp: return "compact_lp";
    case Method::ConventionalLp: return "conv_lp";
    case Method::Qp: return "qp";
    case Method::GraphCut: return "gc";
    }
    return "unknown";
}

Method parse_method(const std::string& name)
{
    for (Method m : kAllMethods) {
        if (to_string(m) == name) {
            return m;
        }
    }
    throw InvalidInputError("unknown method '" + name + "' (expected compact_lp, conv_lp, qp, gc)");
}

double boundary_energy(const SuperpixelGraph& graph, const std::vector<double>& labels, int p)
{
    if (p != 1 && p != 2) {
        throw InvalidInputError("boundary energy: p must be 1 or 2");
    }
    if (static_cast<int>(labels.size()) != graph.node_count()) {
        throw InvalidInputError("boundary energy: label count does not match node count");
    }
    double e = 0.0;
    const auto& edges = graph.edges();
    const auto& w = graph.weights();
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const double d = labels[edges[k].u] - labels[edges[k].v];
        e += p == 1 ? w[k] * std::abs(d) : w[k] * w[k] * d * d;
    }
    return e;
}

double l1plus_energy(const FactorU& factor, const std::vector<double>& labels)
{
    const auto ul = factor.apply(labels);
    double s = 0.0;
    for (double v : ul) {
        s += std::abs(v);
    }
    return s;
}

EnergyReport energy_report(const SuperpixelGraph& graph, const std::vector<double>& labels,
                           const FactorU* factor, const std::optional<UnaryTerm>& unary)
{
    EnergyReport r;
    r.l1 = boundary_energy(graph, labels, 1);
    r.l2 = boundary_energy(graph, labels, 2);
    r.l1plus = factor ? l1plus_energy(*factor, labels) : 0.0;
    if (unary) {
        double a = 0.0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            a += unary->costs[i] * labels[i];
        }
        r.total = unary->lambda * r.l1 + a;
    } else {
        r.total = r.l1;
    }
    return r;
}

namespace {

void check_unary(const std::optional<UnaryTerm>& unary, int n)
{
    if (unary && static_cast<int>(unary->costs.size()) != n) {
        throw InvalidInputError("unary term: cost count does not match node count");
    }
}

void pin_seeds(LpProblem& lp, const SeedSet& seeds)
{
    for (int i : seeds.foreground()) {
        lp.set_bounds(i, 1.0, 1.0);
    }
    for (int i : seeds.background()) {
        lp.set_bounds(i, 0.0, 0.0);
    }
}

LabelField labels_from_lp(const LpSolution& sol, int n, const SeedSet& seeds, Method method)
{
    LabelField f;
    f.solver = method;
    f.values.assign(sol.x.begin(), sol.x.begin() + n);
    for (double& v : f.values) {
        v = std::clamp(v, 0.0, 1.0);
    }
    for (int i : seeds.foreground()) {
        f.values[i] = 1.0;
    }
    for (int i : seeds.background()) {
        f.values[i] = 0.0;
    }
    return f;
}

}  // namespace

LpProblem assemble_compact_lp(const FactorU& factor, const SeedSet& seeds,
                              const std::optional<UnaryTerm>& unary)
{
    const int n = factor.dimension();
    seeds.validate(n);
    check_unary(unary, n);
    LpProblem lp(2 * n);
    const double boundary_scale = unary ? unary->lambda : 1.0;
    for (int i = 0; i < n; ++i) {
        lp.set_bounds(i, 0.0, 1.0);
        lp.set_cost(i, unary ? unary->costs[i] : 0.0);
        lp.set_bounds(n + i, 0.0, kInfinity);
        lp.set_cost(n + i, boundary_scale);
    }
    pin_seeds(lp, seeds);
    for (int k = 0; k < n; ++k) {
        auto r = factor.row(k);
        LpRow upper{r.cols, r.values, 0.0};
        upper.cols.push_back(n + k);
        upper.values.push_back(-1.0);
        LpRow lower = upper;
        for (std::size_t q = 0; q + 1 < lower.values.size(); ++q) {
            lower.values[q] = -lower.values[q];
        }
        lp.add_row(std::move(upper));
        lp.add_row(std::move(lower));
    }
    return lp;
}

LpProblem assemble_conventional_lp(const SuperpixelGraph& graph, const SeedSet& seeds,
                                   const std::optional<UnaryTerm>& unary)
{
    const int n = graph.node_count();
    const int e = graph.edge_count();
    seeds.validate(n);
    check_unary(unary, n);
    LpProblem lp(n + e);
    const double boundary_scale = unary ? unary->lambda : 1.0;
    for (int i = 0; i < n; ++i) {
        lp.set_bounds(i, 0.0, 1.0);
        lp.set_cost(i, unary ? unary->costs[i] : 0.0);
    }
    for (int k = 0; k < e; ++k) {
        lp.set_bounds(n + k, 0.0, kInfinity);
        lp.set_cost(n + k, boundary_scale * graph.weights()[k]);
    }
    pin_seeds(lp, seeds);
    for (int k = 0; k < e; ++k) {
        const auto [u, v] = graph.edges()[k];
        lp.add_row({{u, v, n + k}, {1.0, -1.0, -1.0}, 0.0});
        lp.add_row({{u, v, n + k}, {-1.0, 1.0, -1.0}, 0.0});
    }
    return lp;
}

namespace {

LpRelaxationResult solve_relaxation(const LpProblem& lp, int n, const SeedSet& seeds,
                                    const LpOptions& options, Method method)
{
    LpSolution sol = solve_lp(lp, options);
    if (sol.status != LpStatus::Optimal) {
        throw SolverError(to_string(method) + ": LP solve ended with status " +
                          to_string(sol.status) + " after " + std::to_string(sol.iterations) +
                          " iterations");
    }
    LabelField f = labels_from_lp(sol, n, seeds, method);
    return {std::move(f), std::move(sol)};
}

}  // namespace

LpRelaxationResult solve_compact_lp(const FactorU& factor, const SeedSet& seeds,
                                    const LpOptions& options, const std::optional<UnaryTerm>& unary)
{
    return solve_relaxation(assemble_compact_lp(factor, seeds, unary), factor.dimension(), seeds,
                            options, Method::CompactLp);
}

LpRelaxationResult solve_conventional_lp(const SuperpixelGraph& graph, const SeedSet& seeds,
                                         const LpOptions& options,
                                         const std::optional<UnaryTerm>& unary)
{
    return solve_relaxation(assemble_conventional_lp(graph, seeds, unary), graph.node_count(),
                            seeds, options, Method::ConventionalLp);
}

LabelField solve_random_walker(const SmoothnessMatrix& wtilde_unregularized, const SeedSet& seeds)
{
    const SparseMatrix& w = wtilde_unregularized.matrix();
    const int n = w.rows();
    seeds.validate(n);

    // Components from the off-diagonal pattern.
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (int j = 0; j < n; ++j) {
        for (int p = w.col_ptr()[j]; p < w.col_ptr()[j + 1]; ++p) {
            const int i = w.row_idx()[p];
            if (i != j && w.values()[p] != 0.0) {
                const int a = find(i);
                const int b = find(j);
                if (a != b) {
                    parent[std::max(a, b)] = std::min(a, b);
                }
            }
        }
    }
    std::vector<char> seeded(n, 0);
    for (int i : seeds.foreground()) {
        seeded[find(i)] = 1;
    }
    for (int i : seeds.background()) {
        seeded[find(i)] = 1;
    }
    for (int i = 0; i < n; ++i) {
        if (!seeded[find(i)]) {
            throw UnseededComponentError("random walker: component containing node " +
                                             std::to_string(find(i)) + " has no seed",
                                         find(i));
        }
    }

    LabelField f;
    f.solver = Method::Qp;
    ReducedSystem reduced;
    try {
        reduced = reduce_by_seeds(w, seeds);
    } catch (const DegenerateProblemError& e) {
        f.values = e.labels();
        return f;
    }
    SparseCholesky chol(reduced.matrix, minimum_degree_ordering(reduced.matrix));
    chol.factorize(reduced.matrix);
    auto x = chol.solve(reduced.rhs);
    f.values = reduced.expand(x);
    for (double& v : f.values) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return f;
}

GraphCutResult solve_graph_cut(const SuperpixelGraph& graph, const SeedSet& seeds,
                               const std::optional<UnaryTerm>& unary)
{
    const int n = graph.node_count();
    seeds.validate(n);
    check_unary(unary, n);
    const double scale = unary ? unary->lambda : 1.0;

    double total = 1.0;
    for (double b : graph.weights()) {
        total += scale * b;
    }
    if (unary) {
        for (double a : unary->costs) {
            total += std::abs(a);
        }
    }
    MaxFlowGraph g(n);
    for (int k = 0; k < graph.edge_count(); ++k) {
        const double cap = scale * graph.weights()[k];
        g.add_edge(graph.edges()[k].u, graph.edges()[k].v, cap, cap);
    }
    if (unary) {
        // Source side means label 1; label-1 cost is paid on the sink link.
        for (int i = 0; i < n; ++i) {
            const double a = unary->costs[i];
            if (a > 0.0) {
                g.add_terminal(i, 0.0, a);
            } else if (a < 0.0) {
                g.add_terminal(i, -a, 0.0);
            }
        }
    }
    for (int i : seeds.foreground()) {
        g.add_terminal(i, total, 0.0);
    }
    for (int i : seeds.background()) {
        g.add_terminal(i, 0.0, total);
    }
    GraphCutResult r;
    r.flow = g.solve();
    r.cut = g.cut_value();
    r.labels.solver = Method::GraphCut;
    r.labels.binary = true;
    r.labels.values.resize(n);
    for (int i = 0; i < n; ++i) {
        r.labels.values[i] = g.source_side(i) ? 1.0 : 0.0;
    }
    return r;
}

nlohmann::json result_json(const LabelField& field, const EnergyReport& energy, double threshold)
{
    nlohmann::json j;
    j["labels"] = field.values;
    const auto bin = threshold_labels(field.values, threshold);
    j["binary"] = bin;
    j["energy"] = {{"l1", energy.l1}, {"l2", energy.l2}, {"l1plus", energy.l1plus}};
    j["solver"] = to_string(field.solver);
    j["threshold"] = threshold;
    return j;
}

}  // namespace mrflp
