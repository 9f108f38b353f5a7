#include "mrflp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mrflp/cholesky.hpp"
#include "mrflp/errors.hpp"

namespace mrflp {

LpProblem::LpProblem(int variable_count)
    : cost_(variable_count, 0.0), lo_(variable_count, 0.0), hi_(variable_count, kInfinity)
{
    if (variable_count < 0) {
        throw InvalidInputError("lp: negative variable count");
    }
}

void LpProblem::set_bounds(int var, double lo, double hi)
{
    if (!(lo <= hi)) {
        throw InvalidInputError("lp: lower bound above upper bound for variable " +
                                std::to_string(var));
    }
    lo_.at(var) = lo;
    hi_.at(var) = hi;
}

int LpProblem::add_row(LpRow row)
{
    if (row.cols.size() != row.values.size()) {
        throw InvalidInputError("lp: row column/value length mismatch");
    }
    rows_.push_back(std::move(row));
    return row_count() - 1;
}

void LpProblem::validate() const
{
    const int n = variable_count();
    for (int j = 0; j < n; ++j) {
        if (!std::isfinite(cost_[j])) {
            throw InvalidInputError("lp: non-finite cost at variable " + std::to_string(j));
        }
        if (std::isnan(lo_[j]) || std::isnan(hi_[j]) || lo_[j] > hi_[j] ||
            lo_[j] == kInfinity || hi_[j] == -kInfinity) {
            throw InvalidInputError("lp: invalid bounds at variable " + std::to_string(j));
        }
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        const auto& row = rows_[r];
        if (row.cols.size() != row.values.size() || std::isnan(row.rhs) ||
            row.rhs == -kInfinity) {
            throw InvalidInputError("lp: malformed row " + std::to_string(r));
        }
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
            if (row.cols[k] < 0 || row.cols[k] >= n || !std::isfinite(row.values[k])) {
                throw InvalidInputError("lp: row " + std::to_string(r) +
                                        " references an invalid variable or value");
            }
        }
    }
}

SparseMatrix LpProblem::constraint_matrix() const
{
    std::vector<Triplet> t;
    for (int r = 0; r < row_count(); ++r) {
        const auto& row = rows_[r];
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
            t.push_back({r, row.cols[k], row.values[k]});
        }
    }
    return SparseMatrix::from_triplets(row_count(), variable_count(), t);
}

double LpProblem::objective(const std::vector<double>& x) const
{
    double s = 0.0;
    for (int j = 0; j < variable_count(); ++j) {
        s += cost_[j] * x[j];
    }
    return s;
}

double LpProblem::max_violation(const std::vector<double>& x) const
{
    double v = 0.0;
    for (int j = 0; j < variable_count(); ++j) {
        v = std::max({v, lo_[j] - x[j], x[j] - hi_[j]});
    }
    for (const auto& row : rows_) {
        double a = 0.0;
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
            a += row.values[k] * x[row.cols[k]];
        }
        v = std::max(v, a - row.rhs);
    }
    return v;
}

namespace {

nlohmann::json bound_to_json(double b)
{
    return std::isfinite(b) ? nlohmann::json(b) : nlohmann::json(nullptr);
}

double bound_from_json(const nlohmann::json& j, double infinite_value)
{
    return j.is_null() ? infinite_value : j.get<double>();
}

}  // namespace

nlohmann::json LpProblem::to_json() const
{
    nlohmann::json j;
    j["v"] = 1;
    j["n"] = variable_count();
    j["cost"] = cost_;
    auto lo = nlohmann::json::array();
    auto hi = nlohmann::json::array();
    for (int k = 0; k < variable_count(); ++k) {
        lo.push_back(bound_to_json(lo_[k]));
        hi.push_back(bound_to_json(hi_[k]));
    }
    j["lo"] = std::move(lo);
    j["hi"] = std::move(hi);
    auto rows = nlohmann::json::array();
    for (const auto& r : rows_) {
        rows.push_back({{"cols", r.cols}, {"values", r.values}, {"rhs", bound_to_json(r.rhs)}});
    }
    j["rows"] = std::move(rows);
    return j;
}

LpProblem LpProblem::from_json(const nlohmann::json& j)
{
    try {
        LpProblem p(j.at("n").get<int>());
        p.cost_ = j.at("cost").get<std::vector<double>>();
        const auto& lo = j.at("lo");
        const auto& hi = j.at("hi");
        if (p.cost_.size() != lo.size() || lo.size() != hi.size() ||
            static_cast<int>(lo.size()) != p.variable_count()) {
            throw InvalidInputError("lp json: vector lengths differ from n");
        }
        for (int k = 0; k < p.variable_count(); ++k) {
            p.lo_[k] = bound_from_json(lo[k], -kInfinity);
            p.hi_[k] = bound_from_json(hi[k], kInfinity);
        }
        for (const auto& r : j.at("rows")) {
            p.add_row({r.at("cols").get<std::vector<int>>(),
                       r.at("values").get<std::vector<double>>(),
                       bound_from_json(r.at("rhs"), kInfinity)});
        }
        p.validate();
        return p;
    } catch (const nlohmann::json::exception& ex) {
        throw InvalidInputError(std::string("lp json: ") + ex.what());
    }
}

std::string to_string(LpStatus status)
{
    switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::IterationLimit: return "iteration-limit";
    }
    return "unknown";
}

namespace {

double inf_norm(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

// Problem after removing fixed variables and empty rows. Rows are kept in
// compressed-row form (stored as the CSC of A^T).
struct ReducedLp {
    int n = 0;
    int m = 0;
    SparseMatrix at;  // n x m, column r is row r of A
    std::vector<double> b, c, lo, hi;
    std::vector<int> var_map;  // reduced -> original
    std::vector<double> fixed_x;
    bool trivially_infeasible = false;
};

ReducedLp reduce(const LpProblem& p, double tol)
{
    ReducedLp r;
    const int n0 = p.variable_count();
    r.fixed_x.assign(n0, 0.0);
    std::vector<int> pos(n0, -1);
    for (int j = 0; j < n0; ++j) {
        if (p.lower()[j] == p.upper()[j]) {
            r.fixed_x[j] = p.lower()[j];
        } else {
            pos[j] = r.n++;
            r.var_map.push_back(j);
            r.c.push_back(p.cost()[j]);
            r.lo.push_back(p.lower()[j]);
            r.hi.push_back(p.upper()[j]);
        }
    }
    std::vector<Triplet> t;
    for (const auto& row : p.rows()) {
        if (row.rhs == kInfinity) {
            continue;
        }
        double rhs = row.rhs;
        bool any = false;
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
            const int j = row.cols[k];
            if (pos[j] < 0) {
                rhs -= row.values[k] * r.fixed_x[j];
            } else if (row.values[k] != 0.0) {
                any = true;
            }
        }
        if (!any) {
            if (rhs < -tol) {
                r.trivially_infeasible = true;
            }
            continue;
        }
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
            const int j = row.cols[k];
            if (pos[j] >= 0 && row.values[k] != 0.0) {
                t.push_back({pos[j], r.m, row.values[k]});
            }
        }
        r.b.push_back(rhs);
        ++r.m;
    }
    r.at = SparseMatrix::from_triplets(r.n, r.m, t);
    return r;
}

// Normal matrix  A^T Theta A + diag(delta)  with a fixed pattern, assembled
// column by column through a dense scatter buffer.
class NormalMatrix {
public:
    explicit NormalMatrix(const ReducedLp& lp) : lp_(lp), rows_of_(lp.at.transpose())
    {
        const int n = lp.n;
        const auto& cp = lp.at.col_ptr();
        const auto& ri = lp.at.row_idx();
        const auto& rcp = rows_of_.col_ptr();
        const auto& rri = rows_of_.row_idx();
        std::vector<int> mark(n, -1);
        std::vector<int> col_ptr(n + 1, 0);
        std::vector<int> row_idx;
        for (int j = 0; j < n; ++j) {
            const std::size_t begin = row_idx.size();
            mark[j] = j;
            row_idx.push_back(j);
            for (int a = rcp[j]; a < rcp[j + 1]; ++a) {
                const int r = rri[a];
                for (int b = cp[r]; b < cp[r + 1]; ++b) {
                    if (mark[ri[b]] != j) {
                        mark[ri[b]] = j;
                        row_idx.push_back(ri[b]);
                    }
                }
            }
            std::sort(row_idx.begin() + static_cast<std::ptrdiff_t>(begin), row_idx.end());
            col_ptr[j + 1] = static_cast<int>(row_idx.size());
        }
        std::vector<double> values(row_idx.size(), 0.0);
        matrix_ = SparseMatrix::from_csc(n, n, std::move(col_ptr), std::move(row_idx), std::move(values));
        work_.assign(n, 0.0);
    }

    const SparseMatrix& assemble(const std::vector<double>& theta, const std::vector<double>& delta)
    {
        const auto& cp = lp_.at.col_ptr();
        const auto& ri = lp_.at.row_idx();
        const auto& av = lp_.at.values();
        const auto& rcp = rows_of_.col_ptr();
        const auto& rri = rows_of_.row_idx();
        const auto& rv = rows_of_.values();
        const auto& mcp = matrix_.col_ptr();
        const auto& mri = matrix_.row_idx();
        auto& v = matrix_.values();
        for (int j = 0; j < lp_.n; ++j) {
            work_[j] = delta[j];
            for (int a = rcp[j]; a < rcp[j + 1]; ++a) {
                const int r = rri[a];
                const double coef = theta[r] * rv[a];
                for (int b = cp[r]; b < cp[r + 1]; ++b) {
                    work_[ri[b]] += coef * av[b];
                }
            }
            for (int k = mcp[j]; k < mcp[j + 1]; ++k) {
                v[k] = work_[mri[k]];
                work_[mri[k]] = 0.0;
            }
        }
        return matrix_;
    }

    const SparseMatrix& matrix() const { return matrix_; }

private:
    const ReducedLp& lp_;
    SparseMatrix rows_of_;  // m x n: column j lists the rows that use variable j
    SparseMatrix matrix_;
    std::vector<double> work_;
};

LpSolution finish(const LpProblem& p, const ReducedLp& r, const std::vector<double>& xr,
                  LpStatus status, int iterations, double gap)
{
    LpSolution s;
    s.x = r.fixed_x;
    for (int k = 0; k < r.n; ++k) {
        s.x[r.var_map[k]] = xr[k];
    }
    s.objective = p.objective(s.x);
    s.status = status;
    s.iterations = iterations;
    s.max_violation = p.max_violation(s.x);
    s.relative_gap = gap;
    return s;
}

double max_step(const std::vector<double>& v, const std::vector<double>& dv,
                const std::vector<char>* active = nullptr, double sign = 1.0)
{
    double a = 1.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (active && !(*active)[i]) {
            continue;
        }
        const double d = sign * dv[i];
        if (d < 0.0) {
            a = std::min(a, -v[i] / d);
        }
    }
    return a;
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem, const LpOptions& options)
{
    problem.validate();
    ReducedLp lp = reduce(problem, options.tol_feas);
    // Unit cost scale, so the iterates do not depend on the cost magnitude.
    if (const double cmax = inf_norm(lp.c); cmax > 0.0) {
        for (double& c : lp.c) {
            c /= cmax;
        }
    }
    const int n = lp.n;
    const int m = lp.m;

    if (lp.trivially_infeasible) {
        return finish(problem, lp, std::vector<double>(n, 0.0), LpStatus::Infeasible, 0, 0.0);
    }

    std::vector<char> has_lo(n), has_hi(n);
    int n_lo = 0;
    int n_hi = 0;
    for (int j = 0; j < n; ++j) {
        has_lo[j] = std::isfinite(lp.lo[j]);
        has_hi[j] = std::isfinite(lp.hi[j]);
        n_lo += has_lo[j];
        n_hi += has_hi[j];
    }

    if (n == 0) {
        return finish(problem, lp, {}, LpStatus::Optimal, 0, 0.0);
    }

    // Starting point: strictly inside the box, slacks at least 1.
    std::vector<double> x(n), s(m), y(m, 1.0), z(n, 0.0), w(n, 0.0);
    for (int j = 0; j < n; ++j) {
        if (has_lo[j] && has_hi[j]) {
            x[j] = 0.5 * (lp.lo[j] + lp.hi[j]);
        } else if (has_lo[j]) {
            x[j] = lp.lo[j] + 1.0;
        } else if (has_hi[j]) {
            x[j] = lp.hi[j] - 1.0;
        } else {
            x[j] = 0.0;
        }
        if (has_lo[j]) {
            z[j] = 1.0;
        }
        if (has_hi[j]) {
            w[j] = 1.0;
        }
    }
    {
        auto ax = lp.at.multiply_transpose(x);
        for (int i = 0; i < m; ++i) {
            s[i] = std::max(lp.b[i] - ax[i], 1.0);
        }
    }

    NormalMatrix normal(lp);
    std::vector<int> perm;
    if (options.fill_reducing) {
        perm = minimum_degree_ordering(normal.matrix());
    }
    SparseCholesky chol(normal.matrix(), perm);

    const double cnorm = inf_norm(lp.c);
    const int comp_count = m + n_lo + n_hi;

    std::vector<double> p(n, 0.0), q(n, 0.0);
    auto update_bound_gaps = [&]() {
        for (int j = 0; j < n; ++j) {
            p[j] = has_lo[j] ? x[j] - lp.lo[j] : 0.0;
            q[j] = has_hi[j] ? lp.hi[j] - x[j] : 0.0;
        }
    };

    std::vector<double> theta(m), delta(n);
    std::vector<double> rp(m), rd(n);
    std::vector<double> dx(n), ds(m), dy(m), dz(n), dw(n);
    std::vector<double> dx_a(n), ds_a(m), dy_a(m), dz_a(n), dw_a(n);
    std::vector<double> rs(m), rz(n), rw(n);

    // Solves the Newton system for the given complementarity right-hand sides.
    auto newton = [&](std::vector<double>& ddx, std::vector<double>& dds, std::vector<double>& ddy,
                      std::vector<double>& ddz, std::vector<double>& ddw) {
        std::vector<double> t(m);
        for (int i = 0; i < m; ++i) {
            t[i] = (rs[i] + y[i] * rp[i]) / s[i];
        }
        auto at_t = lp.at.multiply(t);
        std::vector<double> rhs(n);
        for (int j = 0; j < n; ++j) {
            rhs[j] = -rd[j] - at_t[j];
            if (has_lo[j]) {
                rhs[j] += rz[j] / p[j];
            }
            if (has_hi[j]) {
                rhs[j] -= rw[j] / q[j];
            }
        }
        ddx = chol.solve(rhs);
        // One step of iterative refinement.
        auto res = normal.matrix().multiply(ddx);
        for (int j = 0; j < n; ++j) {
            res[j] = rhs[j] - res[j];
        }
        const auto corr = chol.solve(res);
        for (int j = 0; j < n; ++j) {
            ddx[j] += corr[j];
        }
        auto adx = lp.at.multiply_transpose(ddx);
        for (int i = 0; i < m; ++i) {
            dds[i] = -rp[i] - adx[i];
            ddy[i] = (rs[i] - y[i] * dds[i]) / s[i];
        }
        for (int j = 0; j < n; ++j) {
            ddz[j] = has_lo[j] ? (rz[j] - z[j] * ddx[j]) / p[j] : 0.0;
            ddw[j] = has_hi[j] ? (rw[j] + w[j] * ddx[j]) / q[j] : 0.0;
        }
    };

    auto primal_step = [&](const std::vector<double>& ddx, const std::vector<double>& dds) {
        double a = max_step(s, dds);
        a = std::min(a, max_step(p, ddx, &has_lo, 1.0));
        a = std::min(a, max_step(q, ddx, &has_hi, -1.0));
        return a;
    };
    auto dual_step = [&](const std::vector<double>& ddy, const std::vector<double>& ddz,
                         const std::vector<double>& ddw) {
        double a = max_step(y, ddy);
        a = std::min(a, max_step(z, ddz, &has_lo, 1.0));
        a = std::min(a, max_step(w, ddw, &has_hi, 1.0));
        return a;
    };

    double gap = kInfinity;
    double x0norm = inf_norm(x);
    for (int iter = 0; iter <= options.max_iterations; ++iter) {
        update_bound_gaps();
        auto ax = lp.at.multiply_transpose(x);
        for (int i = 0; i < m; ++i) {
            rp[i] = ax[i] + s[i] - lp.b[i];
        }
        auto aty = lp.at.multiply(y);
        for (int j = 0; j < n; ++j) {
            rd[j] = lp.c[j] + aty[j] - z[j] + w[j];
        }
        double comp = 0.0;
        for (int i = 0; i < m; ++i) {
            comp += s[i] * y[i];
        }
        double pobj = 0.0;
        double dobj = 0.0;
        for (int j = 0; j < n; ++j) {
            pobj += lp.c[j] * x[j];
            if (has_lo[j]) {
                comp += p[j] * z[j];
                dobj += lp.lo[j] * z[j];
            }
            if (has_hi[j]) {
                comp += q[j] * w[j];
                dobj -= lp.hi[j] * w[j];
            }
        }
        for (int i = 0; i < m; ++i) {
            dobj -= lp.b[i] * y[i];
        }
        const double mu = comp_count > 0 ? comp / comp_count : 0.0;
        const double pinf = inf_norm(rp);
        const double dinf = inf_norm(rd) / (1.0 + cnorm);
        gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));

        if (pinf <= options.tol_feas && dinf <= options.tol_feas && gap <= options.tol_gap) {
            return finish(problem, lp, x, LpStatus::Optimal, iter, gap);
        }
        const double xnorm = inf_norm(x);
        const double dual_norm = std::max({inf_norm(y), inf_norm(z), inf_norm(w)});
        if (xnorm > 1e10 * (1.0 + x0norm) && pinf <= 1e-6 * (1.0 + xnorm)) {
            return finish(problem, lp, x, LpStatus::Unbounded, iter, gap);
        }
        if (dual_norm > 1e10 * (1.0 + cnorm) && dinf <= 1e-6 * (1.0 + dual_norm)) {
            return finish(problem, lp, x, LpStatus::Infeasible, iter, gap);
        }
        if (iter == options.max_iterations) {
            break;
        }

        double max_diag = 0.0;
        for (int i = 0; i < m; ++i) {
            theta[i] = y[i] / s[i];
        }
        for (int j = 0; j < n; ++j) {
            delta[j] = 1e-12;
            if (has_lo[j]) {
                delta[j] += z[j] / p[j];
            }
            if (has_hi[j]) {
                delta[j] += w[j] / q[j];
            }
        }
        const SparseMatrix& mat = normal.assemble(theta, delta);
        for (int j = 0; j < n; ++j) {
            max_diag = std::max(max_diag, mat.at(j, j));
        }
        chol.factorize(mat, PivotPolicy::Replace, 1e-30 * std::max(max_diag, 1.0));

        // Predictor.
        for (int i = 0; i < m; ++i) {
            rs[i] = -s[i] * y[i];
        }
        for (int j = 0; j < n; ++j) {
            rz[j] = has_lo[j] ? -p[j] * z[j] : 0.0;
            rw[j] = has_hi[j] ? -q[j] * w[j] : 0.0;
        }
        newton(dx_a, ds_a, dy_a, dz_a, dw_a);
        const double ap = primal_step(dx_a, ds_a);
        const double ad = dual_step(dy_a, dz_a, dw_a);
        double mu_aff = 0.0;
        for (int i = 0; i < m; ++i) {
            mu_aff += (s[i] + ap * ds_a[i]) * (y[i] + ad * dy_a[i]);
        }
        for (int j = 0; j < n; ++j) {
            if (has_lo[j]) {
                mu_aff += (p[j] + ap * dx_a[j]) * (z[j] + ad * dz_a[j]);
            }
            if (has_hi[j]) {
                mu_aff += (q[j] - ap * dx_a[j]) * (w[j] + ad * dw_a[j]);
            }
        }
        mu_aff /= std::max(comp_count, 1);
        const double sigma = mu > 0.0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;
        const double target = sigma * mu;

        // Corrector.
        for (int i = 0; i < m; ++i) {
            rs[i] = target - s[i] * y[i] - ds_a[i] * dy_a[i];
        }
        for (int j = 0; j < n; ++j) {
            rz[j] = has_lo[j] ? target - p[j] * z[j] - dx_a[j] * dz_a[j] : 0.0;
            rw[j] = has_hi[j] ? target - q[j] * w[j] + dx_a[j] * dw_a[j] : 0.0;
        }
        newton(dx, ds, dy, dz, dw);
        const double step_p = std::min(1.0, 0.995 * primal_step(dx, ds));
        const double step_d = std::min(1.0, 0.995 * dual_step(dy, dz, dw));
        for (int j = 0; j < n; ++j) {
            x[j] += step_p * dx[j];
            if (has_lo[j]) {
                z[j] += step_d * dz[j];
            }
            if (has_hi[j]) {
                w[j] += step_d * dw[j];
            }
        }
        for (int i = 0; i < m; ++i) {
            s[i] += step_p * ds[i];
            y[i] += step_d * dy[i];
        }
    }
    return finish(problem, lp, x, LpStatus::IterationLimit, options.max_iterations, gap);
}

}  // namespace mrflp
