#pragma once

#include <span>
#include <vector>

#include "mrflp/sparse_matrix.hpp"

namespace mrflp {

enum class PivotPolicy {
    /// Non-positive pivot raises SingularMatrixError.
    Throw,
    /// Pivots below the tolerance are replaced by a huge value, which zeroes
    /// the corresponding solution component. Used by the interior point solver
    /// when its normal matrix becomes numerically semidefinite.
    Replace,
};

/// Up-looking sparse Cholesky  P A P^T = L L^T  with a symbolic phase that can
/// be reused for any matrix sharing the pattern.
///
/// Matrices must be stored with both triangles; only entries that land in the
/// upper triangle after permutation are read.
class SparseCholesky {
public:
    /// `permutation[k]` is the original index eliminated at step k. Empty means
    /// natural order.
    explicit SparseCholesky(const SparseMatrix& pattern, std::vector<int> permutation = {});

    /// `a` must have exactly the pattern given at construction.
    void factorize(const SparseMatrix& a, PivotPolicy policy = PivotPolicy::Throw,
                   double pivot_tolerance = 0.0);

    std::vector<double> solve(std::span<const double> b) const;

    int dimension() const noexcept { return n_; }
    /// Lower factor in permuted index space, diagonal first in each column.
    const SparseMatrix& lower() const noexcept { return lower_; }
    const std::vector<int>& permutation() const noexcept { return perm_; }
    int replaced_pivots() const noexcept { return replaced_; }
    long long factor_nonzeros() const noexcept { return lower_.nonzeros(); }

private:
    int n_ = 0;
    std::vector<int> perm_;
    std::vector<int> pinv_;
    // Upper triangle of the permuted matrix (pattern + scratch values).
    std::vector<int> cp_;
    std::vector<int> ci_;
    std::vector<double> cx_;
    // For each stored entry of the input pattern, its slot in cx_ or -1.
    std::vector<int> amap_;
    std::vector<int> parent_;
    std::vector<int> lp_;
    SparseMatrix lower_;
    int replaced_ = 0;
    bool factored_ = false;
};

/// Greedy minimum-degree elimination order on the symmetric pattern
/// (ties broken by smallest index). Deterministic.
std::vector<int> minimum_degree_ordering(const SparseMatrix& symmetric_pattern);

}  // namespace mrflp
