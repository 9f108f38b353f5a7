#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrflp/factorization.hpp"
#include "mrflp/graph.hpp"
#include "mrflp/lp.hpp"
#include "mrflp/relaxations.hpp"
#include "mrflp/seeds.hpp"

namespace mrflp {

inline constexpr std::uint64_t kDefaultInstanceSeed = 42;

// ---- random instances ----

/// Erdos-Renyi G(n, p), resampled until connected; weights uniform in (0, 1].
SuperpixelGraph random_connected_graph(int n, double edge_probability, std::mt19937_64& rng);

/// rows x cols 4-connected grid with weights uniform in (0, 1].
SuperpixelGraph random_grid_graph(int rows, int cols, std::mt19937_64& rng);

/// At least one seed of each class, at most `max_seeds` in total, disjoint.
SeedSet random_seeds(int n, int max_seeds, std::mt19937_64& rng);

// ---- verification reports ----

struct PsdReport {
    int dimension = 0;
    double min_eigenvalue = 0.0;  // exact for dense, power-iteration estimate otherwise
    double scale = 0.0;           // max |W~_ij|
    std::string method;           // "dense" or "randomized"
    bool pass = false;

    nlohmann::json to_json() const;
};

inline constexpr int kDensePsdLimit = 200;

/// pass iff lambda_min >= -1e-8 * scale. Above the dense limit the verdict
/// is certified by a Cholesky factorization of W~ + 1e-8 scale I.
PsdReport verify_psd(const SparseMatrix& wtilde, std::uint64_t seed = kDefaultInstanceSeed);

struct FactorizationReport {
    int dimension = 0;
    double epsilon = 0.0;
    double max_u_minus_r = 0.0;    // max |U - R|, R from Householder QR
    double relative_residual = 0.0;  // max |U^T U - (W~ + eps I)| / scale
    bool pass = false;

    nlohmann::json to_json() const;
};

inline constexpr double kFactorIdentityTol = 1e-8;
inline constexpr double kFactorResidualTol = 1e-10;

FactorizationReport verify_factorization(const SuperpixelGraph& graph, double epsilon);

struct CorollaryReport {
    int trials = 0;
    double max_l2_relative_error = 0.0;  // | |UL|_2 - |A L|_2 | / |A L|_2
    double max_transform_error = 0.0;    // max |U L - Q^T A L|
    bool pass = false;

    nlohmann::json to_json() const;
};

inline constexpr double kCorollaryL2Tol = 1e-10;
inline constexpr double kCorollaryTransformTol = 1e-8;

/// A is the epsilon-augmented weighted gradient; Q comes from the QR reference.
CorollaryReport verify_corollaries(const SuperpixelGraph& graph, double epsilon, int trials,
                                   std::mt19937_64& rng);

struct NormBoundReport {
    int trials = 0;
    double q_l1 = 0.0;
    double qt_l1 = 0.0;
    int sandwich_violations = 0;
    int classical_violations = 0;
    double worst_sandwich_margin = 0.0;   // min over trials of the slack, negative on violation
    double worst_classical_margin = 0.0;
    bool pass = false;

    nlohmann::json to_json() const;
};

inline constexpr double kNormBoundSlack = 1e-8;

/// For random L:  |A L|_1 / |Q|_1 <= |U L|_1 <= |Q^T|_1 |A L|_1  with A the
/// augmented weighted gradient, and  |x|_1 / sqrt(m) <= |x|_2 <= |x|_1  for
/// x = diag(w) D L of length m. Slack 1e-8 times the larger side (at least 1).
NormBoundReport verify_norm_bounds(const SuperpixelGraph& graph, const FactorU& factor,
                                   const OrthogonalFactor& q, int trials, std::mt19937_64& rng);

struct SandwichReport {
    double opt_conventional = 0.0;
    double opt_compact = 0.0;
    double q_l1 = 0.0;
    double qt_l1 = 0.0;
    double lower = 0.0;  // opt_conventional / |Q|_1
    double upper = 0.0;  // |Q^T|_1 opt_conventional
    double slack = 0.0;
    bool pass = false;

    nlohmann::json to_json() const;
};

inline constexpr double kSandwichSlack = 1e-6;

/// Solves both LPs under `seeds`; slack is 1e-6 times max(1, upper).
SandwichReport verify_optimal_sandwich(const SuperpixelGraph& graph, const SeedSet& seeds,
                                       double epsilon, const LpOptions& options = {});

struct HarmonicReport {
    double max_residual = 0.0;  // max_i |sum_j B_ij^2 (L_i - L_j)| / sum_j B_ij^2 over free i
    double hull_violation = 0.0;
    bool pass = false;

    nlohmann::json to_json() const;
};

inline constexpr double kHarmonicTol = 1e-8;

HarmonicReport verify_harmonic(const SuperpixelGraph& graph, const SeedSet& seeds,
                               const std::vector<double>& labels);

struct ExactnessReport {
    double exhaustive_energy = 0.0;
    double graph_cut_energy = 0.0;
    double conventional_rounded_energy = 0.0;
    bool graph_cut_exact = false;
    bool conventional_matches = false;  // within 1e-6 relative
    bool pass = false;

    nlohmann::json to_json() const;
};

inline constexpr int kExhaustiveMaxFree = 20;

/// Brute force over all labelings of the free nodes (at most 2^20).
double exhaustive_min_energy(const SuperpixelGraph& graph, const SeedSet& seeds);

ExactnessReport verify_exactness(const SuperpixelGraph& graph, const SeedSet& seeds,
                                 const LpOptions& options = {});

// ---- problem sizes and timing ----

struct LpSize {
    long long variables = 0;
    long long rows = 0;
    long long bounds = 0;  // finite variable bounds (lower and upper counted separately)
};

struct ProblemSizeReport {
    long long nodes = 0;
    long long edges = 0;
    LpSize compact;
    LpSize conventional;

    nlohmann::json to_json() const;
};

/// Pure arithmetic: compact (2N, 2N), conventional (N + |E|, 2|E|).
ProblemSizeReport problem_size_report(long long nodes, long long edges);

LpSize measure_lp_size(const LpProblem& problem);

struct TimingRow {
    std::string method;
    int n = 0;
    double median_seconds = 0.0;
    std::vector<double> samples;
};

/// Near-square random grids of each size, solved with every method.
/// Each size uses a fresh generator seeded with `seed + size`.
std::vector<TimingRow> timing_bench(const std::vector<int>& sizes, int repetitions,
                                    std::uint64_t seed = kDefaultInstanceSeed,
                                    const std::vector<Method>& methods = {Method::CompactLp,
                                                                          Method::ConventionalLp,
                                                                          Method::Qp,
                                                                          Method::GraphCut},
                                    const LpOptions& options = {});

/// "method,n,median_seconds"
std::string timing_csv(const std::vector<TimingRow>& rows);

// ---- full suite ----

struct VerifyOptions {
    std::uint64_t seed = kDefaultInstanceSeed;
    int psd_instances = 200;
    int factor_instances = 50;
    int norm_instances = 20;
    int trials = 100;
    int exactness_instances = 100;
    LpOptions lp;
};

/// Runs every check on generated instances. Result has "pass" and one
/// object per check with its own "pass".
nlohmann::json verify_all(const VerifyOptions& options);

}  // namespace mrflp
