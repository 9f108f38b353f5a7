#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mrflp/graph.hpp"
#include "mrflp/sparse_matrix.hpp"

namespace mrflp {

/// Hard label constraints: foreground nodes fixed to 1, background to 0.
class SeedSet {
public:
    SeedSet() = default;
    /// Sorts and deduplicates. Throws if the sets intersect.
    SeedSet(std::vector<int> foreground, std::vector<int> background);

    const std::vector<int>& foreground() const noexcept { return foreground_; }
    const std::vector<int>& background() const noexcept { return background_; }
    int size() const noexcept { return static_cast<int>(foreground_.size() + background_.size()); }
    bool empty() const noexcept { return size() == 0; }

    bool is_foreground(int node) const;
    bool is_background(int node) const;
    std::optional<double> value_of(int node) const;

    /// Range check against `node_count`; with `require_both` both classes
    /// must be nonempty.
    void validate(int node_count, bool require_both = false) const;

    /// Per-node seed value, NaN where unseeded.
    std::vector<double> dense_values(int node_count) const;

    friend bool operator==(const SeedSet&, const SeedSet&) = default;

private:
    std::vector<int> foreground_;
    std::vector<int> background_;
};

/// A symmetric system restricted to the unseeded nodes.
///
/// For a full system  [A_uu A_us; A_su A_ss]  with x_s fixed by the seeds the
/// reduced problem is  A_uu x_u = rhs  with  rhs = -A_us x_s.
struct ReducedSystem {
    int full_dimension = 0;
    std::vector<int> free_nodes;
    SparseMatrix matrix;
    std::vector<double> rhs;
    /// Seed values on the full index space, the free entries left at 0.
    std::vector<double> seeded_values;

    /// Scatters a solution over `free_nodes` back into a full label vector.
    std::vector<double> expand(std::span<const double> reduced_solution) const;
};

/// Throws DegenerateProblemError carrying the seed labels when no node is free.
ReducedSystem reduce_by_seeds(const SparseMatrix& symmetric, const SeedSet& seeds);

}  // namespace mrflp
