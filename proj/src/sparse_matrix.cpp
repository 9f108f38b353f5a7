#include "mrflp/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mrflp/errors.hpp"

namespace mrflp {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::span<const Triplet> entries)
{
    if (rows < 0 || cols < 0) {
        throw InvalidInputError("sparse matrix: negative dimension");
    }
    SparseMatrix m(rows, cols);
    std::vector<int> counts(cols, 0);
    for (const auto& t : entries) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
            throw InvalidInputError("sparse matrix: triplet index out of range");
        }
        ++counts[t.col];
    }
    std::vector<int> start(cols + 1, 0);
    std::partial_sum(counts.begin(), counts.end(), start.begin() + 1);

    std::vector<int> rows_tmp(entries.size());
    std::vector<double> vals_tmp(entries.size());
    std::vector<int> next(start.begin(), start.end() - 1);
    for (const auto& t : entries) {
        int p = next[t.col]++;
        rows_tmp[p] = t.row;
        vals_tmp[p] = t.value;
    }

    std::vector<int> order;
    m.row_idx_.reserve(entries.size());
    m.values_.reserve(entries.size());
    for (int j = 0; j < cols; ++j) {
        order.resize(start[j + 1] - start[j]);
        std::iota(order.begin(), order.end(), start[j]);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return rows_tmp[a] < rows_tmp[b]; });
        for (int p : order) {
            if (!m.row_idx_.empty() && static_cast<int>(m.row_idx_.size()) > m.col_ptr_[j] &&
                m.row_idx_.back() == rows_tmp[p]) {
                m.values_.back() += vals_tmp[p];
            } else {
                m.row_idx_.push_back(rows_tmp[p]);
                m.values_.push_back(vals_tmp[p]);
            }
        }
        m.col_ptr_[j + 1] = static_cast<int>(m.row_idx_.size());
    }
    return m;
}

SparseMatrix SparseMatrix::from_csc(int rows, int cols, std::vector<int> col_ptr,
                                    std::vector<int> row_idx, std::vector<double> values)
{
    if (static_cast<int>(col_ptr.size()) != cols + 1 || row_idx.size() != values.size() ||
        col_ptr.back() != static_cast<int>(row_idx.size())) {
        throw InvalidInputError("sparse matrix: inconsistent compressed arrays");
    }
    SparseMatrix m(rows, cols);
    m.col_ptr_ = std::move(col_ptr);
    m.row_idx_ = std::move(row_idx);
    m.values_ = std::move(values);
    return m;
}

SparseMatrix SparseMatrix::identity(int n)
{
    std::vector<Triplet> t;
    t.reserve(n);
    for (int i = 0; i < n; ++i) {
        t.push_back({i, i, 1.0});
    }
    return from_triplets(n, n, t);
}

SparseMatrix SparseMatrix::from_dense(const Eigen::MatrixXd& dense, double drop_tol)
{
    std::vector<Triplet> t;
    for (int j = 0; j < dense.cols(); ++j) {
        for (int i = 0; i < dense.rows(); ++i) {
            if (std::abs(dense(i, j)) > drop_tol) {
                t.push_back({i, j, dense(i, j)});
            }
        }
    }
    return from_triplets(static_cast<int>(dense.rows()), static_cast<int>(dense.cols()), t);
}

double SparseMatrix::at(int row, int col) const
{
    auto first = row_idx_.begin() + col_ptr_[col];
    auto last = row_idx_.begin() + col_ptr_[col + 1];
    auto it = std::lower_bound(first, last, row);
    if (it != last && *it == row) {
        return values_[it - row_idx_.begin()];
    }
    return 0.0;
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const
{
    std::vector<double> y(rows_, 0.0);
    for (int j = 0; j < cols_; ++j) {
        const double xj = x[j];
        if (xj == 0.0) {
            continue;
        }
        for (int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
            y[row_idx_[p]] += values_[p] * xj;
        }
    }
    return y;
}

std::vector<double> SparseMatrix::multiply_transpose(std::span<const double> y) const
{
    std::vector<double> x(cols_, 0.0);
    for (int j = 0; j < cols_; ++j) {
        double s = 0.0;
        for (int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
            s += values_[p] * y[row_idx_[p]];
        }
        x[j] = s;
    }
    return x;
}

SparseMatrix SparseMatrix::transpose() const
{
    std::vector<Triplet> t;
    t.reserve(values_.size());
    for (int j = 0; j < cols_; ++j) {
        for (int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
            t.push_back({j, row_idx_[p], values_[p]});
        }
    }
    return from_triplets(cols_, rows_, t);
}

Eigen::MatrixXd SparseMatrix::to_dense() const
{
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows_, cols_);
    for (int j = 0; j < cols_; ++j) {
        for (int p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
            d(row_idx_[p], j) = values_[p];
        }
    }
    return d;
}

double SparseMatrix::max_abs() const
{
    double m = 0.0;
    for (double v : values_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

}  // namespace mrflp
