#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace mrflp {

struct Triplet {
    int row;
    int col;
    double value;
};

/// Compressed sparse column matrix. Row indices inside a column are sorted
/// and unique.
class SparseMatrix {
public:
    SparseMatrix() = default;
    SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), col_ptr_(cols + 1, 0) {}

    /// Duplicate entries are summed. Explicit zeros are kept so that a
    /// pattern can be shared across numeric updates.
    static SparseMatrix from_triplets(int rows, int cols, std::span<const Triplet> entries);
    /// Adopts compressed arrays; row indices must already be sorted per column.
    static SparseMatrix from_csc(int rows, int cols, std::vector<int> col_ptr,
                                 std::vector<int> row_idx, std::vector<double> values);
    static SparseMatrix identity(int n);
    static SparseMatrix from_dense(const Eigen::MatrixXd& dense, double drop_tol = 0.0);

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    int nonzeros() const noexcept { return static_cast<int>(values_.size()); }

    const std::vector<int>& col_ptr() const noexcept { return col_ptr_; }
    const std::vector<int>& row_idx() const noexcept { return row_idx_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::vector<double>& values() noexcept { return values_; }

    /// Returns 0 for structurally absent entries.
    double at(int row, int col) const;

    std::vector<double> multiply(std::span<const double> x) const;
    std::vector<double> multiply_transpose(std::span<const double> y) const;

    SparseMatrix transpose() const;
    Eigen::MatrixXd to_dense() const;

    double max_abs() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> col_ptr_{0};
    std::vector<int> row_idx_;
    std::vector<double> values_;
};

}  // namespace mrflp
