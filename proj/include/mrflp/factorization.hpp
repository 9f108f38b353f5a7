#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mrflp/cholesky.hpp"
#include "mrflp/graph.hpp"
#include "mrflp/sparse_matrix.hpp"

namespace mrflp {

/// Sparse upper-triangular factor U with  U^T U = W~ + eps I  (or, with a
/// fill-reducing permutation P,  (U P)^T (U P) = W~ + eps I).
///
/// U is stored as its transpose in compressed columns, so row k of U is
/// column k of the stored lower factor.
class FactorU {
public:
    FactorU(SparseMatrix lower, std::vector<int> permutation, double epsilon);

    int dimension() const noexcept { return lower_.rows(); }
    double epsilon() const noexcept { return epsilon_; }
    bool permuted() const noexcept { return permuted_; }
    const std::vector<int>& permutation() const noexcept { return perm_; }

    /// Entries of row k of the operator  U P  as (original column, value).
    struct RowView {
        std::vector<int> cols;
        std::vector<double> values;
    };
    RowView row(int k) const;

    std::vector<double> apply(std::span<const double> labels) const;            // U P x
    std::vector<double> apply_transpose(std::span<const double> y) const;       // P^T U^T y
    std::vector<double> solve_transpose(std::span<const double> b) const;       // x with P^T U^T x = b

    /// Dense  U P.
    Eigen::MatrixXd to_dense() const;
    long long nonzeros() const noexcept { return lower_.nonzeros(); }

    /// max |U^T U - target| / max |target|  (target includes eps).
    double relative_residual(const SmoothnessMatrix& target) const;

    /// Coordinate text dump, one "row col value" line per entry of U, 0-based.
    void write_coordinates(std::ostream& out) const;

private:
    SparseMatrix lower_;
    std::vector<int> perm_;
    double epsilon_;
    bool permuted_;
};

struct CholeskyOptions {
    /// Changes U (not U^T U); off by default so U is reproducible in natural order.
    bool fill_reducing = false;
};

/// Throws SingularMatrixError naming the failing index on a non-positive pivot.
FactorU cholesky_upper(const SmoothnessMatrix& wtilde, CholeskyOptions options = {});

/// Column-orthonormal factor for the augmented weighted gradient.
struct OrthogonalFactor {
    Eigen::MatrixXd q;

    /// Induced l1 norm (max absolute column sum) of Q and of Q^T.
    double l1_norm() const;
    double transpose_l1_norm() const;
};

struct QrReference {
    OrthogonalFactor q;
    Eigen::MatrixXd r;
};

/// [ weighted_gradient ; sqrt(eps) I ] as a sparse matrix.
SparseMatrix augmented_operator(const SparseMatrix& weighted_gradient, double epsilon);

inline constexpr int kQrReferenceMaxDimension = 512;

/// Dense Householder QR of the augmented operator with R sign-normalised to a
/// positive diagonal. Throws RankDeficientError.
QrReference qr_reference(const SparseMatrix& weighted_gradient, double epsilon);

/// Q = [weighted_gradient ; sqrt(eps) I] (U P)^-1 via triangular solves, with
/// eps taken from the factor.
OrthogonalFactor recover_q(const SparseMatrix& weighted_gradient, const FactorU& factor);

}  // namespace mrflp
