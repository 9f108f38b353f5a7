#include "mrflp/cholesky.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mrflp/errors.hpp"

namespace mrflp {

namespace {

// Nonzero pattern of row k of L, returned in s[top..n-1] in topological order.
int ereach(const std::vector<int>& cp, const std::vector<int>& ci, int k,
           const std::vector<int>& parent, std::vector<int>& s, std::vector<int>& mark,
           int stamp)
{
    const int n = static_cast<int>(parent.size());
    int top = n;
    mark[k] = stamp;
    for (int p = cp[k]; p < cp[k + 1]; ++p) {
        int i = ci[p];
        if (i > k) {
            continue;
        }
        int len = 0;
        for (; mark[i] != stamp; i = parent[i]) {
            s[len++] = i;
            mark[i] = stamp;
        }
        while (len > 0) {
            s[--top] = s[--len];
        }
    }
    return top;
}

}  // namespace

SparseCholesky::SparseCholesky(const SparseMatrix& pattern, std::vector<int> permutation)
    : n_(pattern.rows()), perm_(std::move(permutation))
{
    if (pattern.cols() != n_) {
        throw InvalidInputError("cholesky: matrix must be square");
    }
    if (perm_.empty()) {
        perm_.resize(n_);
        std::iota(perm_.begin(), perm_.end(), 0);
    }
    if (static_cast<int>(perm_.size()) != n_) {
        throw InvalidInputError("cholesky: permutation has wrong length");
    }
    pinv_.assign(n_, -1);
    for (int k = 0; k < n_; ++k) {
        if (perm_[k] < 0 || perm_[k] >= n_ || pinv_[perm_[k]] != -1) {
            throw InvalidInputError("cholesky: invalid permutation");
        }
        pinv_[perm_[k]] = k;
    }

    // Upper triangle of P A P^T.
    const auto& acp = pattern.col_ptr();
    const auto& ari = pattern.row_idx();
    std::vector<Triplet> t;
    for (int j = 0; j < n_; ++j) {
        for (int p = acp[j]; p < acp[j + 1]; ++p) {
            const int i = ari[p];
            if (pinv_[i] <= pinv_[j]) {
                t.push_back({pinv_[i], pinv_[j], 0.0});
            }
        }
    }
    for (int k = 0; k < n_; ++k) {
        t.push_back({k, k, 0.0});  // diagonal always present
    }
    SparseMatrix c = SparseMatrix::from_triplets(n_, n_, t);
    cp_ = c.col_ptr();
    ci_ = c.row_idx();
    cx_.assign(ci_.size(), 0.0);

    amap_.assign(pattern.nonzeros(), -1);
    for (int j = 0; j < n_; ++j) {
        for (int p = acp[j]; p < acp[j + 1]; ++p) {
            const int i = ari[p];
            const int pi = pinv_[i];
            const int pj = pinv_[j];
            if (pi <= pj) {
                auto first = ci_.begin() + cp_[pj];
                auto last = ci_.begin() + cp_[pj + 1];
                amap_[p] = static_cast<int>(std::lower_bound(first, last, pi) - ci_.begin());
            }
        }
    }

    // Elimination tree (Liu's algorithm with path compression).
    parent_.assign(n_, -1);
    std::vector<int> ancestor(n_, -1);
    for (int k = 0; k < n_; ++k) {
        for (int p = cp_[k]; p < cp_[k + 1]; ++p) {
            int i = ci_[p];
            while (i != -1 && i < k) {
                const int next = ancestor[i];
                ancestor[i] = k;
                if (next == -1) {
                    parent_[i] = k;
                }
                i = next;
            }
        }
    }

    // Column counts of L via row patterns.
    std::vector<int> counts(n_, 1);
    std::vector<int> s(n_), mark(n_, -1);
    for (int k = 0; k < n_; ++k) {
        const int top = ereach(cp_, ci_, k, parent_, s, mark, k);
        for (int q = top; q < n_; ++q) {
            ++counts[s[q]];
        }
    }
    lp_.assign(n_ + 1, 0);
    std::partial_sum(counts.begin(), counts.end(), lp_.begin() + 1);
}

void SparseCholesky::factorize(const SparseMatrix& a, PivotPolicy policy, double pivot_tolerance)
{
    if (a.rows() != n_ || a.nonzeros() != static_cast<int>(amap_.size())) {
        throw InvalidInputError("cholesky: matrix pattern differs from the analysed pattern");
    }
    std::fill(cx_.begin(), cx_.end(), 0.0);
    const auto& av = a.values();
    for (std::size_t p = 0; p < amap_.size(); ++p) {
        if (amap_[p] >= 0) {
            cx_[amap_[p]] += av[p];
        }
    }

    const int nnz = lp_[n_];
    std::vector<int> li(nnz);
    std::vector<double> lx(nnz);
    std::vector<int> c(lp_.begin(), lp_.end() - 1);
    std::vector<int> s(n_), mark(n_, -1);
    std::vector<double> x(n_, 0.0);
    replaced_ = 0;

    for (int k = 0; k < n_; ++k) {
        int top = ereach(cp_, ci_, k, parent_, s, mark, k);
        x[k] = 0.0;
        for (int p = cp_[k]; p < cp_[k + 1]; ++p) {
            if (ci_[p] <= k) {
                x[ci_[p]] = cx_[p];
            }
        }
        double d = x[k];
        x[k] = 0.0;
        for (; top < n_; ++top) {
            const int i = s[top];
            const double lki = x[i] / lx[lp_[i]];
            x[i] = 0.0;
            for (int p = lp_[i] + 1; p < c[i]; ++p) {
                x[li[p]] -= lx[p] * lki;
            }
            d -= lki * lki;
            const int p = c[i]++;
            li[p] = k;
            lx[p] = lki;
        }
        if (!(d > pivot_tolerance)) {
            if (policy == PivotPolicy::Throw) {
                factored_ = false;
                throw SingularMatrixError(
                    "cholesky: non-positive pivot at index " + std::to_string(perm_[k]), perm_[k]);
            }
            d = 1e128;
            ++replaced_;
        }
        const int p = c[k]++;
        li[p] = k;
        lx[p] = std::sqrt(d);
    }

    // Columns are already sorted with the diagonal first.
    lower_ = SparseMatrix::from_csc(n_, n_, lp_, std::move(li), std::move(lx));
    factored_ = true;
}

std::vector<double> SparseCholesky::solve(std::span<const double> b) const
{
    if (!factored_) {
        throw SolverError("cholesky: solve before a successful factorization");
    }
    const auto& lcp = lower_.col_ptr();
    const auto& lri = lower_.row_idx();
    const auto& lv = lower_.values();
    std::vector<double> x(n_);
    for (int k = 0; k < n_; ++k) {
        x[k] = b[perm_[k]];
    }
    for (int j = 0; j < n_; ++j) {
        x[j] /= lv[lcp[j]];
        for (int p = lcp[j] + 1; p < lcp[j + 1]; ++p) {
            x[lri[p]] -= lv[p] * x[j];
        }
    }
    for (int j = n_ - 1; j >= 0; --j) {
        for (int p = lcp[j] + 1; p < lcp[j + 1]; ++p) {
            x[j] -= lv[p] * x[lri[p]];
        }
        x[j] /= lv[lcp[j]];
    }
    std::vector<double> out(n_);
    for (int k = 0; k < n_; ++k) {
        out[perm_[k]] = x[k];
    }
    return out;
}

}  // namespace mrflp
