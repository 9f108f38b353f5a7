#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrflp/sparse_matrix.hpp"

namespace mrflp {

/// Undirected edge in canonical order `u < v`.
struct Edge {
    int u;
    int v;
    friend bool operator==(const Edge&, const Edge&) = default;
};

using FeatureVector = std::vector<double>;

/// Default constant term of the contrast-sensitive edge weight.
inline constexpr double kDefaultWeightFloor = 0.00001;

/// B_ij = 1 / (1 + |I_i - I_j|^2) + c for every edge. Throws InvalidInputError
/// on non-finite features, mismatched feature lengths or negative c.
std::vector<double> compute_edge_weights(std::span<const Edge> edges,
                                         std::span<const FeatureVector> features,
                                         double c);

/// Weighted neighbourhood graph. Immutable once constructed.
class SuperpixelGraph {
public:
    SuperpixelGraph() = default;

    /// Validates canonical ordering, uniqueness, range and positivity.
    SuperpixelGraph(int node_count, std::vector<FeatureVector> features,
                    std::vector<Edge> edges, std::vector<double> weights);

    /// Weights computed from `features` with `compute_edge_weights`.
    static SuperpixelGraph from_features(std::vector<FeatureVector> features,
                                         std::vector<Edge> edges, double c);

    int node_count() const noexcept { return node_count_; }
    int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
    const std::vector<FeatureVector>& features() const noexcept { return features_; }
    const std::vector<Edge>& edges() const noexcept { return edges_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    /// Connected component id per node, components numbered by smallest member.
    std::vector<int> components() const;

    nlohmann::json to_json() const;
    static SuperpixelGraph from_json(const nlohmann::json& j);

private:
    int node_count_ = 0;
    std::vector<FeatureVector> features_;
    std::vector<Edge> edges_;
    std::vector<double> weights_;
};

/// Compact |E| x N signed incidence: row k is +1 at edges[k].u, -1 at edges[k].v.
struct IncidenceOperator {
    int node_count = 0;
    std::vector<Edge> rows;
    std::vector<double> weights;

    int row_count() const noexcept { return static_cast<int>(rows.size()); }

    /// diag(w) D as an explicit sparse matrix.
    SparseMatrix weighted_matrix() const;
    /// diag(w) D x, one entry per edge.
    std::vector<double> weighted_gradient(std::span<const double> x) const;
};

IncidenceOperator build_incidence(const SuperpixelGraph& graph);

/// Sum of w_k^2 (e_i - e_j)(e_i - e_j)^T plus epsilon I.
class SmoothnessMatrix {
public:
    SmoothnessMatrix(SparseMatrix matrix, double epsilon)
        : matrix_(std::move(matrix)), epsilon_(epsilon) {}

    int dimension() const noexcept { return matrix_.rows(); }
    double epsilon() const noexcept { return epsilon_; }
    /// Full symmetric storage (both triangles), epsilon already on the diagonal.
    const SparseMatrix& matrix() const noexcept { return matrix_; }

    double quadratic_form(std::span<const double> x) const;
    double max_diagonal() const;

private:
    SparseMatrix matrix_;
    double epsilon_;
};

SmoothnessMatrix build_wtilde(const IncidenceOperator& incidence, double epsilon);

/// 1e-8 times the largest diagonal entry of the unregularized matrix
/// (1e-8 when the graph has no edges).
double default_epsilon(const SmoothnessMatrix& unregularized);

}  // namespace mrflp
