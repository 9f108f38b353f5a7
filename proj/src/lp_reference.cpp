#include <algorithm>
#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "mrflp/errors.hpp"
#include "mrflp/lp.hpp"

namespace mrflp {

namespace {

constexpr double kArtificialBound = 1e7;

struct Halfspace {
    Eigen::VectorXd a;
    double b;
    bool artificial;
};

}  // namespace

LpSolution solve_lp_dense_reference(const LpProblem& problem)
{
    problem.validate();
    const int n = problem.variable_count();
    const int m = problem.row_count();
    if (n > kReferenceMaxVariables || m > kReferenceMaxRows) {
        throw InvalidInputError("reference lp: problem exceeds enumeration limits");
    }
    LpSolution out;
    out.x.assign(n, 0.0);
    if (n == 0) {
        out.status = LpStatus::Optimal;
        out.max_violation = problem.max_violation(out.x);
        if (out.max_violation > 1e-9) {
            out.status = LpStatus::Infeasible;
        }
        return out;
    }

    std::vector<Halfspace> hs;
    for (const auto& row : problem.rows()) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
            a(row.cols[k]) += row.values[k];
        }
        hs.push_back({a, row.rhs, false});
    }
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(j) = 1.0;
        const double lo = problem.lower()[j];
        const double hi = problem.upper()[j];
        hs.push_back({-e, std::isfinite(lo) ? -lo : kArtificialBound, !std::isfinite(lo)});
        hs.push_back({e, std::isfinite(hi) ? hi : kArtificialBound, !std::isfinite(hi)});
    }
    const int k_total = static_cast<int>(hs.size());

    Eigen::VectorXd c(n);
    for (int j = 0; j < n; ++j) {
        c(j) = problem.cost()[j];
    }

    double best = kInfinity;
    Eigen::VectorXd best_x;
    bool best_artificial = false;
    std::vector<int> pick;
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);

    const double feas_tol = 1e-9;
    std::function<void(int)> enumerate = [&](int start) {
        if (static_cast<int>(pick.size()) == n) {
            for (int r = 0; r < n; ++r) {
                a.row(r) = hs[pick[r]].a.transpose();
                b(r) = hs[pick[r]].b;
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
            if (lu.rank() < n) {
                return;
            }
            const Eigen::VectorXd x = lu.solve(b);
            bool touches_artificial = false;
            for (int h = 0; h < k_total; ++h) {
                const double slack = hs[h].a.dot(x) - hs[h].b;
                const double scale = 1.0 + std::abs(hs[h].b);
                if (slack > feas_tol * scale) {
                    return;
                }
                if (hs[h].artificial && slack > -1e-6 * scale) {
                    touches_artificial = true;
                }
            }
            const double obj = c.dot(x);
            const double tie = 1e-9 * (1.0 + std::abs(obj));
            if (obj < best - tie || (std::abs(obj - best) <= tie && best_artificial &&
                                     !touches_artificial)) {
                best = obj;
                best_x = x;
                best_artificial = touches_artificial;
            }
            return;
        }
        const int need = n - static_cast<int>(pick.size());
        for (int h = start; h <= k_total - need; ++h) {
            pick.push_back(h);
            enumerate(h + 1);
            pick.pop_back();
        }
    };
    enumerate(0);

    if (!std::isfinite(best)) {
        out.status = LpStatus::Infeasible;
        return out;
    }
    for (int j = 0; j < n; ++j) {
        out.x[j] = best_x(j);
    }
    out.objective = problem.objective(out.x);
    out.max_violation = problem.max_violation(out.x);
    out.status = best_artificial ? LpStatus::Unbounded : LpStatus::Optimal;
    return out;
}

}  // namespace mrflp
