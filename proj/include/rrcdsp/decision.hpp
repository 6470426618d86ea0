#pragma once
// Decision layer: the error-margin index, deviation variables, reliability
// targets, admissible-space computation, and the grid solvers for the two
// constraint modes (robust: EMI threshold; reliability: tail probability).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rrcdsp/network.hpp"

namespace rrcdsp::decision {

enum class ConstraintMode { Robust, Reliability };
enum class SpreadCombiner { Additive, RootSumSquare };

struct CdspProblem {
    net::SubsystemNetwork network;
    net::UncertaintySpec uncertainty;
    std::string design_variable;
    double lo = 0.0, hi = 1.0; // design-variable bounds
    int grid_points = 101;
    double y_target = 0.0;       // lower requirement limit
    double emi_target = 0.0;     // > 0
    double alpha_target = 0.0;   // in (0, 1)
    std::size_t mc_samples = 10000;
    std::uint64_t seed = 0;
    SpreadCombiner combiner = SpreadCombiner::Additive;

    /// Fill emi_target from alpha_target (or vice versa) and check their
    /// quantile consistency to 1e-6 when both are given.
    void reconcile_targets();
    void validate() const;
};

struct DesignEvaluation {
    double design_value = 0.0;
    double f_hat = 0.0;
    double sigma_pr = 0.0;
    double sigma_pa = 0.0;
    double emi = 0.0;          // +-inf when the spread is degenerate
    double phi_emi = 0.0;      // Phi(emi)
    double alpha_hat = 0.0;    // empirical reliability
    double d_minus = 0.0;
    double d_plus = 0.0;
    bool admissible_robust = false;
    bool admissible_reliable = false;
    bool meets_emi_floor = false; // the EMI > 1 floor, tracked separately
    bool degenerate_spread = false;
    double skewness = 0.0;
    double ex_kurtosis = 0.0;
};

struct GridInterval {
    std::size_t first; // inclusive grid indices
    std::size_t last;
};

struct CdspSolution {
    ConstraintMode mode;
    bool feasible = false;
    std::optional<double> optimal_design;
    std::optional<double> d_minus;
    std::optional<double> d_plus;
    std::optional<double> alpha_achieved;
    std::optional<std::size_t> optimal_index;
    std::vector<GridInterval> admissible;
    std::vector<DesignEvaluation> sweep;
};

/// (f_hat - y_target) / spread. The spread is sigma_pr + sigma_pa for the
/// additive combiner, the root-sum-square otherwise. A spread below 1e-12
/// yields +-inf depending on the sign of the margin.
double emi(double f_hat, double y_target, double sigma_pr, double sigma_pa,
           SpreadCombiner combiner = SpreadCombiner::Additive);

/// Underachievement / overachievement split of the normalized EMI goal:
/// EMI/EMI_target + d_minus - d_plus = 1 holds exactly.
std::pair<double, double> deviation(double emi_value, double emi_target);

double alpha_from_emi_target(double emi_target);
double emi_target_from_alpha(double alpha_target);

/// Full-mode propagation at one design point plus the derived decision
/// quantities and admissibility flags.
DesignEvaluation evaluate_design(const CdspProblem& problem, double design_value,
                                 std::uint64_t point_seed);

/// Evaluate all grid points (uniform over [lo, hi]), each from its own
/// counter-derived seed; ordered by design value.
std::vector<DesignEvaluation> sweep(const CdspProblem& problem);

/// Maximal runs of consecutive grid points whose mode flag holds.
std::vector<GridInterval> admissible_set(const std::vector<DesignEvaluation>& sweep,
                                         ConstraintMode mode);

/// Reduce an existing sweep: restrict to the admissible set and minimize
/// d_minus, then d_plus, then the design value.
CdspSolution solve_from_sweep(const CdspProblem& problem,
                              std::vector<DesignEvaluation> sweep, ConstraintMode mode);

/// sweep + solve_from_sweep.
CdspSolution solve(const CdspProblem& problem, ConstraintMode mode);

/// Exact column order used by the sweep CSV.
extern const char* const kSweepCsvHeader;

std::string sweep_csv_row(const DesignEvaluation& e);

} // namespace rrcdsp::decision
