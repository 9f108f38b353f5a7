#include "mrflp/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mrflp/errors.hpp"

namespace mrflp {

namespace {

void sort_unique(std::vector<int>& v)
{
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

SeedSet::SeedSet(std::vector<int> foreground, std::vector<int> background)
    : foreground_(std::move(foreground)), background_(std::move(background))
{
    sort_unique(foreground_);
    sort_unique(background_);
    std::vector<int> both;
    std::set_intersection(foreground_.begin(), foreground_.end(), background_.begin(),
                          background_.end(), std::back_inserter(both));
    if (!both.empty()) {
        throw InvalidInputError("seeds: node " + std::to_string(both.front()) +
                                " is both foreground and background");
    }
}

bool SeedSet::is_foreground(int node) const
{
    return std::binary_search(foreground_.begin(), foreground_.end(), node);
}

bool SeedSet::is_background(int node) const
{
    return std::binary_search(background_.begin(), background_.end(), node);
}

std::optional<double> SeedSet::value_of(int node) const
{
    if (is_foreground(node)) {
        return 1.0;
    }
    if (is_background(node)) {
        return 0.0;
    }
    return std::nullopt;
}

void SeedSet::validate(int node_count, bool require_both) const
{
    auto check = [&](const std::vector<int>& v) {
        if (!v.empty() && (v.front() < 0 || v.back() >= node_count)) {
            throw InvalidInputError("seeds: index out of range for " +
                                    std::to_string(node_count) + " nodes");
        }
    };
    check(foreground_);
    check(background_);
    if (require_both && (foreground_.empty() || background_.empty())) {
        throw InvalidInputError("seeds: both foreground and background seeds are required");
    }
}

std::vector<double> SeedSet::dense_values(int node_count) const
{
    std::vector<double> v(node_count, std::numeric_limits<double>::quiet_NaN());
    for (int i : foreground_) {
        v[i] = 1.0;
    }
    for (int i : background_) {
        v[i] = 0.0;
    }
    return v;
}

std::vector<double> ReducedSystem::expand(std::span<const double> reduced_solution) const
{
    std::vector<double> full = seeded_values;
    for (std::size_t k = 0; k < free_nodes.size(); ++k) {
        full[free_nodes[k]] = reduced_solution[k];
    }
    return full;
}

ReducedSystem reduce_by_seeds(const SparseMatrix& symmetric, const SeedSet& seeds)
{
    const int n = symmetric.rows();
    if (symmetric.cols() != n) {
        throw InvalidInputError("reduce_by_seeds: matrix must be square");
    }
    seeds.validate(n);

    const auto dense = seeds.dense_values(n);
    ReducedSystem r;
    r.full_dimension = n;
    r.seeded_values.assign(n, 0.0);
    std::vector<int> position(n, -1);
    for (int i = 0; i < n; ++i) {
        if (std::isnan(dense[i])) {
            position[i] = static_cast<int>(r.free_nodes.size());
            r.free_nodes.push_back(i);
        } else {
            r.seeded_values[i] = dense[i];
        }
    }
    if (r.free_nodes.empty()) {
        throw DegenerateProblemError("reduce_by_seeds: every node is seeded", r.seeded_values);
    }

    const int m = static_cast<int>(r.free_nodes.size());
    r.rhs.assign(m, 0.0);
    std::vector<Triplet> t;
    const auto& cp = symmetric.col_ptr();
    const auto& ri = symmetric.row_idx();
    const auto& val = symmetric.values();
    for (int j = 0; j < n; ++j) {
        for (int p = cp[j]; p < cp[j + 1]; ++p) {
            const int i = ri[p];
            if (position[i] < 0) {
                continue;
            }
            if (position[j] >= 0) {
                t.push_back({position[i], position[j], val[p]});
            } else {
                r.rhs[position[i]] -= val[p] * r.seeded_values[j];
            }
        }
    }
    r.matrix = SparseMatrix::from_triplets(m, m, t);
    return r;
}

}  // namespace mrflp
