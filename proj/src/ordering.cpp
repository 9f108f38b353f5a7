#include <algorithm>
#include <set>
#include <utility>
#include <vector>

#include "mrflp/cholesky.hpp"
#include "mrflp/errors.hpp"

namespace mrflp {

std::vector<int> minimum_degree_ordering(const SparseMatrix& symmetric_pattern)
{
    const int n = symmetric_pattern.rows();
    if (symmetric_pattern.cols() != n) {
        throw InvalidInputError("minimum degree: matrix must be square");
    }
    std::vector<std::vector<int>> adj(n);
    const auto& cp = symmetric_pattern.col_ptr();
    const auto& ri = symmetric_pattern.row_idx();
    for (int j = 0; j < n; ++j) {
        for (int p = cp[j]; p < cp[j + 1]; ++p) {
            const int i = ri[p];
            if (i != j) {
                adj[i].push_back(j);
                adj[j].push_back(i);
            }
        }
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }

    std::set<std::pair<int, int>> queue;
    for (int i = 0; i < n; ++i) {
        queue.emplace(static_cast<int>(adj[i].size()), i);
    }
    std::vector<char> eliminated(n, 0);
    std::vector<int> order;
    order.reserve(n);
    std::vector<int> merged;
    while (!queue.empty()) {
        const int v = queue.begin()->second;
        queue.erase(queue.begin());
        eliminated[v] = 1;
        order.push_back(v);
        const std::vector<int> clique = std::move(adj[v]);
        adj[v].clear();
        // Turn the neighbourhood of v into a clique.
        for (int u : clique) {
            queue.erase({static_cast<int>(adj[u].size()), u});
            merged.clear();
            std::set_union(adj[u].begin(), adj[u].end(), clique.begin(), clique.end(),
                           std::back_inserter(merged));
            merged.erase(std::remove_if(merged.begin(), merged.end(),
                                        [&](int w) { return w == u || w == v; }),
                         merged.end());
            adj[u].swap(merged);
            queue.emplace(static_cast<int>(adj[u].size()), u);
        }
    }
    return order;
}

}  // namespace mrflp
