#include "mrflp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <utility>

#include "mrflp/errors.hpp"

namespace mrflp {

std::vector<double> compute_edge_weights(std::span<const Edge> edges,
                                         std::span<const FeatureVector> features,
                                         double c)
{
    if (!(c >= 0.0) || !std::isfinite(c)) {
        throw InvalidInputError("edge weights: c must be a finite nonnegative number");
    }
    for (const auto& f : features) {
        for (double v : f) {
            if (!std::isfinite(v)) {
                throw InvalidInputError("edge weights: non-finite feature value");
            }
        }
    }
    std::vector<double> w;
    w.reserve(edges.size());
    for (const auto& e : edges) {
        if (e.u < 0 || e.v < 0 || e.u >= static_cast<int>(features.size()) ||
            e.v >= static_cast<int>(features.size())) {
            throw InvalidInputError("edge weights: edge endpoint out of range");
        }
        const auto& a = features[e.u];
        const auto& b = features[e.v];
        if (a.size() != b.size()) {
            throw InvalidInputError("edge weights: feature vectors differ in length");
        }
        double d2 = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) {
            d2 += (a[k] - b[k]) * (a[k] - b[k]);
        }
        w.push_back(1.0 / (1.0 + d2) + c);
    }
    return w;
}

SuperpixelGraph::SuperpixelGraph(int node_count, std::vector<FeatureVector> features,
                                 std::vector<Edge> edges, std::vector<double> weights)
    : node_count_(node_count),
      features_(std::move(features)),
      edges_(std::move(edges)),
      weights_(std::move(weights))
{
    if (node_count_ <= 0) {
        throw InvalidInputError("graph: node count must be positive");
    }
    if (!features_.empty() && static_cast<int>(features_.size()) != node_count_) {
        throw InvalidInputError("graph: feature count does not match node count");
    }
    if (weights_.size() != edges_.size()) {
        throw InvalidInputError("graph: weight count does not match edge count");
    }
    std::set<std::pair<int, int>> seen;
    for (std::size_t k = 0; k < edges_.size(); ++k) {
        const Edge& e = edges_[k];
        if (e.u < 0 || e.v >= node_count_ || e.u >= e.v) {
            throw InvalidInputError("graph: edge " + std::to_string(k) +
                                    " is not canonical (0 <= u < v < n)");
        }
        if (!seen.emplace(e.u, e.v).second) {
            throw InvalidInputError("graph: duplicate edge (" + std::to_string(e.u) + "," +
                                    std::to_string(e.v) + ")");
        }
        if (!(weights_[k] > 0.0) || !std::isfinite(weights_[k])) {
            throw InvalidInputError("graph: edge weights must be finite and positive");
        }
    }
}

SuperpixelGraph SuperpixelGraph::from_features(std::vector<FeatureVector> features,
                                               std::vector<Edge> edges, double c)
{
    auto w = compute_edge_weights(edges, features, c);
    const int n = static_cast<int>(features.size());
    return SuperpixelGraph(n, std::move(features), std::move(edges), std::move(w));
}

std::vector<int> SuperpixelGraph::components() const
{
    std::vector<int> parent(node_count_);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const auto& e : edges_) {
        int a = find(e.u);
        int b = find(e.v);
        if (a != b) {
            parent[std::max(a, b)] = std::min(a, b);
        }
    }
    std::vector<int> comp(node_count_);
    for (int i = 0; i < node_count_; ++i) {
        comp[i] = find(i);
    }
    return comp;
}

nlohmann::json SuperpixelGraph::to_json() const
{
    nlohmann::json j;
    j["n"] = node_count_;
    j["features"] = features_;
    auto edges = nlohmann::json::array();
    for (const auto& e : edges_) {
        edges.push_back({e.u, e.v});
    }
    j["edges"] = std::move(edges);
    j["weights"] = weights_;
    return j;
}

SuperpixelGraph SuperpixelGraph::from_json(const nlohmann::json& j)
{
    try {
        const int n = j.at("n").get<int>();
        std::vector<FeatureVector> features;
        if (j.contains("features")) {
            features = j.at("features").get<std::vector<FeatureVector>>();
        }
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges")) {
            if (!e.is_array() || e.size() != 2) {
                throw InvalidInputError("graph json: each edge must be a pair");
            }
            edges.push_back({e[0].get<int>(), e[1].get<int>()});
        }
        std::vector<double> weights;
        if (j.contains("weights")) {
            weights = j.at("weights").get<std::vector<double>>();
        } else {
            weights = compute_edge_weights(edges, features, kDefaultWeightFloor);
        }
        return SuperpixelGraph(n, std::move(features), std::move(edges), std::move(weights));
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidInputError(std::string("graph json: ") + ex.what());
    }
}

SparseMatrix IncidenceOperator::weighted_matrix() const
{
    std::vector<Triplet> t;
    t.reserve(2 * rows.size());
    for (int k = 0; k < row_count(); ++k) {
        t.push_back({k, rows[k].u, weights[k]});
        t.push_back({k, rows[k].v, -weights[k]});
    }
    return SparseMatrix::from_triplets(row_count(), node_count, t);
}

std::vector<double> IncidenceOperator::weighted_gradient(std::span<const double> x) const
{
    std::vector<double> g(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        g[k] = weights[k] * (x[rows[k].u] - x[rows[k].v]);
    }
    return g;
}

IncidenceOperator build_incidence(const SuperpixelGraph& graph)
{
    return IncidenceOperator{graph.node_count(), graph.edges(), graph.weights()};
}

double SmoothnessMatrix::quadratic_form(std::span<const double> x) const
{
    auto y = matrix_.multiply(x);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        s += x[i] * y[i];
    }
    return s;
}

double SmoothnessMatrix::max_diagonal() const
{
    double m = 0.0;
    for (int i = 0; i < dimension(); ++i) {
        m = std::max(m, matrix_.at(i, i));
    }
    return m;
}

SmoothnessMatrix build_wtilde(const IncidenceOperator& incidence, double epsilon)
{
    if (!(epsilon >= 0.0)) {
        throw InvalidInputError("smoothness matrix: epsilon must be nonnegative");
    }
    const int n = incidence.node_count;
    std::vector<Triplet> t;
    t.reserve(4 * incidence.rows.size() + n);
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, epsilon});
    }
    for (int k = 0; k < incidence.row_count(); ++k) {
        const auto [u, v] = incidence.rows[k];
        const double w2 = incidence.weights[k] * incidence.weights[k];
        t.push_back({u, u, w2});
        t.push_back({v, v, w2});
        t.push_back({u, v, -w2});
        t.push_back({v, u, -w2});
    }
    return SmoothnessMatrix(SparseMatrix::from_triplets(n, n, t), epsilon);
}

double default_epsilon(const SmoothnessMatrix& unregularized)
{
    const double d = unregularized.max_diagonal() - unregularized.epsilon();
    return d > 0.0 ? 1e-8 * d : 1e-8;
}

}  // namespace mrflp
