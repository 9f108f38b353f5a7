#pragma once

#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrflp/sparse_matrix.hpp"

namespace mrflp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// One inequality row  sum_k values[k] * x[cols[k]] <= rhs.
struct LpRow {
    std::vector<int> cols;
    std::vector<double> values;
    double rhs = 0.0;
};

/// min c^T x  s.t.  A x <= b,  lo <= x <= hi.
class LpProblem {
public:
    LpProblem() = default;
    explicit LpProblem(int variable_count);

    int variable_count() const noexcept { return static_cast<int>(cost_.size()); }
    int row_count() const noexcept { return static_cast<int>(rows_.size()); }

    void set_cost(int var, double c) { cost_.at(var) = c; }
    void set_bounds(int var, double lo, double hi);
    /// Returns the row index.
    int add_row(LpRow row);

    const std::vector<double>& cost() const noexcept { return cost_; }
    const std::vector<double>& lower() const noexcept { return lo_; }
    const std::vector<double>& upper() const noexcept { return hi_; }
    const std::vector<LpRow>& rows() const noexcept { return rows_; }

    /// Throws InvalidInputError when an invariant is broken.
    void validate() const;

    /// Row-wise constraint matrix (row_count x variable_count).
    SparseMatrix constraint_matrix() const;

    double objective(const std::vector<double>& x) const;
    /// Largest violation of any row or bound by x.
    double max_violation(const std::vector<double>& x) const;

    /// Debug format: {"v":1,"n":..,"cost":[..],"lo":[..],"hi":[..],
    /// "rows":[{"cols":[..],"values":[..],"rhs":..}]}; infinite bounds are null.
    nlohmann::json to_json() const;
    static LpProblem from_json(const nlohmann::json& j);

private:
    std::vector<double> cost_;
    std::vector<double> lo_;
    std::vector<double> hi_;
    std::vector<LpRow> rows_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(LpStatus status);

struct LpSolution {
    std::vector<double> x;
    double objective = 0.0;
    LpStatus status = LpStatus::IterationLimit;
    int iterations = 0;
    double max_violation = 0.0;
    double relative_gap = 0.0;
};

struct LpOptions {
    double tol_feas = 1e-8;
    double tol_gap = 1e-8;
    int max_iterations = 200;
    /// Order the normal equations with minimum degree before factorizing.
    bool fill_reducing = true;
};

/// Mehrotra predictor-corrector primal-dual interior point method.
/// Infeasibility and unboundedness are reported via the status.
LpSolution solve_lp(const LpProblem& problem, const LpOptions& options = {});

inline constexpr int kReferenceMaxVariables = 12;
inline constexpr int kReferenceMaxRows = 24;

/// Exact optimum by enumerating basic points of {A x <= b, lo <= x <= hi}.
/// Enumeration scale only; larger problems are rejected with InvalidInputError.
LpSolution solve_lp_dense_reference(const LpProblem& problem);

}  // namespace mrflp
