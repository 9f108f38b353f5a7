#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrflp/factorization.hpp"
#include "mrflp/graph.hpp"
#include "mrflp/lp.hpp"
#include "mrflp/seeds.hpp"

namespace mrflp {

enum class Method { CompactLp, ConventionalLp, Qp, GraphCut };

std::string to_string(Method method);
/// Accepts "compact_lp", "conv_lp", "qp", "gc". Throws InvalidInputError.
Method parse_method(const std::string& name);
inline constexpr Method kAllMethods[] = {Method::CompactLp, Method::ConventionalLp, Method::Qp,
                                         Method::GraphCut};

/// Per-node labels in [0, 1] with provenance.
struct LabelField {
    std::vector<double> values;
    Method solver = Method::CompactLp;
    bool binary = false;
};

/// Optional data term  sum_i A_i L_i  scaled against  lambda * boundary.
/// When absent (seed-only segmentation) lambda cancels and is ignored.
struct UnaryTerm {
    std::vector<double> costs;
    double lambda = 10.0;
};

struct EnergyReport {
    double l1 = 0.0;       // sum B_ij |L_i - L_j|
    double l2 = 0.0;       // sum B_ij^2 (L_i - L_j)^2
    double l1plus = 0.0;   // |U L|_1, 0 when no factor is supplied
    double total = 0.0;    // lambda * l1 + unary (l1 in seed-only mode)
};

/// p = 1: sum B_ij |dL|;  p = 2: sum B_ij^2 dL^2 (each edge once).
double boundary_energy(const SuperpixelGraph& graph, const std::vector<double>& labels, int p);

double l1plus_energy(const FactorU& factor, const std::vector<double>& labels);

EnergyReport energy_report(const SuperpixelGraph& graph, const std::vector<double>& labels,
                           const FactorU* factor = nullptr,
                           const std::optional<UnaryTerm>& unary = std::nullopt);

/// Variables [L_0..L_{N-1}, delta_0..delta_{N-1}]; objective 1^T delta
/// (lambda 1^T delta + A^T L with a unary term); rows  U L - delta <= 0  and
/// -U L - delta <= 0; seeds pinned with lo == hi.
LpProblem assemble_compact_lp(const FactorU& factor, const SeedSet& seeds,
                              const std::optional<UnaryTerm>& unary = std::nullopt);

/// Variables [L_0..L_{N-1}, X_0..X_{|E|-1}]; objective sum B_k X_k; rows
/// L_i - L_j - X_k <= 0 and -(L_i - L_j) - X_k <= 0.
LpProblem assemble_conventional_lp(const SuperpixelGraph& graph, const SeedSet& seeds,
                                   const std::optional<UnaryTerm>& unary = std::nullopt);

struct LpRelaxationResult {
    LabelField labels;
    LpSolution lp;
};

/// Throws SolverError when the LP does not reach optimality.
LpRelaxationResult solve_compact_lp(const FactorU& factor, const SeedSet& seeds,
                                    const LpOptions& options = {},
                                    const std::optional<UnaryTerm>& unary = std::nullopt);
LpRelaxationResult solve_conventional_lp(const SuperpixelGraph& graph, const SeedSet& seeds,
                                         const LpOptions& options = {},
                                         const std::optional<UnaryTerm>& unary = std::nullopt);

/// Harmonic labels from the seed-reduced system of the unregularized matrix.
/// Throws UnseededComponentError when a connected component has no seed.
LabelField solve_random_walker(const SmoothnessMatrix& wtilde_unregularized, const SeedSet& seeds);

struct GraphCutResult {
    LabelField labels;
    double flow = 0.0;
    double cut = 0.0;
};

/// Exact binary minimiser of the p = 1 boundary energy (plus optional unary)
/// under the seeds. Components without seeds are labelled 0.
GraphCutResult solve_graph_cut(const SuperpixelGraph& graph, const SeedSet& seeds,
                               const std::optional<UnaryTerm>& unary = std::nullopt);

/// Result JSON: {"labels","binary","energy":{"l1","l2","l1plus"},"solver","threshold"}.
nlohmann::json result_json(const LabelField& field, const EnergyReport& energy, double threshold);

}  // namespace mrflp
