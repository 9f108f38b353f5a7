#include "mrflp/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "mrflp/errors.hpp"

namespace mrflp {

FactorU::FactorU(SparseMatrix lower, std::vector<int> permutation, double epsilon)
    : lower_(std::move(lower)), perm_(std::move(permutation)), epsilon_(epsilon)
{
    const int n = lower_.rows();
    if (perm_.empty()) {
        perm_.resize(n);
        std::iota(perm_.begin(), perm_.end(), 0);
    }
    permuted_ = false;
    for (int k = 0; k < n; ++k) {
        if (perm_[k] != k) {
            permuted_ = true;
            break;
        }
    }
    const auto& cp = lower_.col_ptr();
    const auto& v = lower_.values();
    for (int k = 0; k < n; ++k) {
        if (cp[k] == cp[k + 1] || lower_.row_idx()[cp[k]] != k || !(v[cp[k]] > 0.0)) {
            throw SingularMatrixError("factor: missing or non-positive diagonal", k);
        }
    }
}

FactorU::RowView FactorU::row(int k) const
{
    RowView r;
    const auto& cp = lower_.col_ptr();
    for (int p = cp[k]; p < cp[k + 1]; ++p) {
        r.cols.push_back(perm_[lower_.row_idx()[p]]);
        r.values.push_back(lower_.values()[p]);
    }
    return r;
}

std::vector<double> FactorU::apply(std::span<const double> labels) const
{
    const int n = dimension();
    std::vector<double> xp(n);
    for (int k = 0; k < n; ++k) {
        xp[k] = labels[perm_[k]];
    }
    // (U x)_k = sum_i L(i,k) x_i
    return lower_.multiply_transpose(xp);
}

std::vector<double> FactorU::apply_transpose(std::span<const double> y) const
{
    const int n = dimension();
    auto zp = lower_.multiply(y);
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) {
        out[perm_[k]] = zp[k];
    }
    return out;
}

std::vector<double> FactorU::solve_transpose(std::span<const double> b) const
{
    // P^T L x = b  ->  L x = P b, forward substitution.
    const int n = dimension();
    const auto& cp = lower_.col_ptr();
    const auto& ri = lower_.row_idx();
    const auto& v = lower_.values();
    std::vector<double> x(n);
    for (int k = 0; k < n; ++k) {
        x[k] = b[perm_[k]];
    }
    for (int j = 0; j < n; ++j) {
        x[j] /= v[cp[j]];
        for (int p = cp[j] + 1; p < cp[j + 1]; ++p) {
            x[ri[p]] -= v[p] * x[j];
        }
    }
    return x;
}

Eigen::MatrixXd FactorU::to_dense() const
{
    const int n = dimension();
    Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const auto r = row(k);
        for (std::size_t q = 0; q < r.cols.size(); ++q) {
            u(k, r.cols[q]) = r.values[q];
        }
    }
    return u;
}

double FactorU::relative_residual(const SmoothnessMatrix& target) const
{
    const Eigen::MatrixXd u = to_dense();
    const Eigen::MatrixXd w = target.matrix().to_dense();
    const double scale = std::max(w.cwiseAbs().maxCoeff(), 1e-300);
    return (u.transpose() * u - w).cwiseAbs().maxCoeff() / scale;
}

void FactorU::write_coordinates(std::ostream& out) const
{
    const auto prec = out.precision(17);
    for (int k = 0; k < dimension(); ++k) {
        const auto r = row(k);
        for (std::size_t q = 0; q < r.cols.size(); ++q) {
            out << k << ' ' << r.cols[q] << ' ' << r.values[q] << '\n';
        }
    }
    out.precision(prec);
}

FactorU cholesky_upper(const SmoothnessMatrix& wtilde, CholeskyOptions options)
{
    std::vector<int> perm;
    if (options.fill_reducing) {
        perm = minimum_degree_ordering(wtilde.matrix());
    }
    SparseCholesky chol(wtilde.matrix(), perm);
    chol.factorize(wtilde.matrix(), PivotPolicy::Throw);
    return FactorU(chol.lower(), chol.permutation(), wtilde.epsilon());
}

double OrthogonalFactor::l1_norm() const
{
    return q.size() == 0 ? 0.0 : q.cwiseAbs().colwise().sum().maxCoeff();
}

double OrthogonalFactor::transpose_l1_norm() const
{
    return q.size() == 0 ? 0.0 : q.cwiseAbs().rowwise().sum().maxCoeff();
}

SparseMatrix augmented_operator(const SparseMatrix& weighted_gradient, double epsilon)
{
    const int m = weighted_gradient.rows();
    const int n = weighted_gradient.cols();
    std::vector<Triplet> t;
    t.reserve(weighted_gradient.nonzeros() + n);
    const auto& cp = weighted_gradient.col_ptr();
    for (int j = 0; j < n; ++j) {
        for (int p = cp[j]; p < cp[j + 1]; ++p) {
            t.push_back({weighted_gradient.row_idx()[p], j, weighted_gradient.values()[p]});
        }
    }
    if (epsilon > 0.0) {
        const double s = std::sqrt(epsilon);
        for (int j = 0; j < n; ++j) {
            t.push_back({m + j, j, s});
        }
        return SparseMatrix::from_triplets(m + n, n, t);
    }
    return SparseMatrix::from_triplets(m, n, t);
}

QrReference qr_reference(const SparseMatrix& weighted_gradient, double epsilon)
{
    const int n = weighted_gradient.cols();
    if (n > kQrReferenceMaxDimension) {
        throw InvalidInputError("qr_reference: dimension exceeds the dense reference limit");
    }
    const Eigen::MatrixXd a = augmented_operator(weighted_gradient, epsilon).to_dense();
    const int m = static_cast<int>(a.rows());
    if (m < n) {
        throw RankDeficientError("qr_reference: fewer rows than columns");
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    Eigen::MatrixXd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, n);

    const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
    for (int k = 0; k < n; ++k) {
        if (std::abs(r(k, k)) <= 1e-12 * scale * std::max(1, m)) {
            throw RankDeficientError("qr_reference: rank deficient at column " +
                                     std::to_string(k));
        }
        if (r(k, k) < 0.0) {
            r.row(k) *= -1.0;
            q.col(k) *= -1.0;
        }
    }
    return QrReference{OrthogonalFactor{std::move(q)}, std::move(r)};
}

OrthogonalFactor recover_q(const SparseMatrix& weighted_gradient, const FactorU& factor)
{
    const int n = factor.dimension();
    if (weighted_gradient.cols() != n) {
        throw InvalidInputError("recover_q: operator and factor dimensions differ");
    }
    const SparseMatrix a = augmented_operator(weighted_gradient, factor.epsilon());
    const SparseMatrix at = a.transpose();
    const int m = a.rows();
    Eigen::MatrixXd q(m, n);
    std::vector<double> row(n);
    for (int r = 0; r < m; ++r) {
        std::fill(row.begin(), row.end(), 0.0);
        for (int p = at.col_ptr()[r]; p < at.col_ptr()[r + 1]; ++p) {
            row[at.row_idx()[p]] = at.values()[p];
        }
        const auto qr = factor.solve_transpose(row);
        for (int k = 0; k < n; ++k) {
            q(r, k) = qr[k];
        }
    }
    return OrthogonalFactor{std::move(q)};
}

}  // namespace mrflp
