#include "rrcdsp/decision.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "rrcdsp/parallel.hpp"
#include "rrcdsp/stats.hpp"

namespace rrcdsp::decision {

namespace {
constexpr double kDegenerateSpread = 1e-12;
constexpr std::uint64_t kSweepTag = 0x5EEDu;
} // namespace

void CdspProblem::reconcile_targets() {
    const bool has_emi = emi_target != 0.0;
    const bool has_alpha = alpha_target != 0.0;
    if (!has_emi && !has_alpha)
        throw std::invalid_argument("CdspProblem: need emi_target or alpha_target");
    if (has_emi && !has_alpha) {
        alpha_target = alpha_from_emi_target(emi_target);
    } else if (has_alpha && !has_emi) {
        emi_target = emi_target_from_alpha(alpha_target);
    } else if (std::abs(alpha_from_emi_target(emi_target) - alpha_target) > 1e-6) {
        throw std::invalid_argument(
            "CdspProblem: emi_target and alpha_target disagree beyond 1e-6");
    }
}

void CdspProblem::validate() const {
    network.validate();
    if (!(lo < hi)) throw std::invalid_argument("CdspProblem: lo must be below hi");
    if (grid_points < 2) throw std::invalid_argument("CdspProblem: need at least 2 grid points");
    if (!(emi_target > 0.0)) throw std::invalid_argument("CdspProblem: emi_target must be > 0");
    if (!(alpha_target > 0.0 && alpha_target < 1.0))
        throw std::invalid_argument("CdspProblem: alpha_target must lie in (0, 1)");
    if (mc_samples < 100) throw std::invalid_argument("CdspProblem: mc_samples too small");
    bool found = false;
    for (const auto& e : network.externals) found |= (e.name == design_variable);
    if (!found)
        throw std::invalid_argument("CdspProblem: design variable '" + design_variable +
                                    "' is not a network external");
}

double emi(double f_hat, double y_target, double sigma_pr, double sigma_pa,
           SpreadCombiner combiner) {
    if (sigma_pr < 0.0 || sigma_pa < 0.0)
        throw std::invalid_argument("emi: negative spread component");
    const double spread = combiner == SpreadCombiner::Additive
                              ? sigma_pr + sigma_pa
                              : std::sqrt(sigma_pr * sigma_pr + sigma_pa * sigma_pa);
    if (spread < kDegenerateSpread) {
        return f_hat > y_target ? std::numeric_limits<double>::infinity()
                                : -std::numeric_limits<double>::infinity();
    }
    return (f_hat - y_target) / spread;
}

std::pair<double, double> deviation(double emi_value, double emi_target) {
    if (!(emi_target > 0.0)) throw std::invalid_argument("deviation: emi_target must be > 0");
    const double ratio = emi_value / emi_target;
    return {std::max(0.0, 1.0 - ratio), std::max(0.0, ratio - 1.0)};
}

double alpha_from_emi_target(double emi_target) {
    if (!std::isfinite(emi_target))
        throw std::invalid_argument("alpha_from_emi_target: non-finite target");
    return normal_cdf(emi_target);
}

double emi_target_from_alpha(double alpha_target) {
    return normal_quantile(alpha_target);
}

DesignEvaluation evaluate_design(const CdspProblem& problem, double design_value,
                                 std::uint64_t point_seed) {
    if (design_value < problem.lo || design_value > problem.hi)
        throw std::invalid_argument("evaluate_design: design value outside bounds");

    const auto dist = net::propagate(problem.network, {{problem.design_variable, design_value}},
                                     problem.uncertainty, net::PropagationMode::Full,
                                     problem.mc_samples, point_seed);

    DesignEvaluation e;
    e.design_value = design_value;
    e.f_hat = dist.mean;
    e.sigma_pr = dist.std_pr.value();
    e.sigma_pa = dist.std_pa.value();
    e.emi = emi(e.f_hat, problem.y_target, e.sigma_pr, e.sigma_pa, problem.combiner);
    e.degenerate_spread = !std::isfinite(e.emi);
    e.phi_emi = e.degenerate_spread ? (e.emi > 0.0 ? 1.0 : 0.0) : normal_cdf(e.emi);
    e.alpha_hat = net::empirical_reliability(dist, problem.y_target);
    if (e.degenerate_spread) {
        e.d_minus = std::numeric_limits<double>::quiet_NaN();
        e.d_plus = std::numeric_limits<double>::quiet_NaN();
    } else {
        std::tie(e.d_minus, e.d_plus) = deviation(e.emi, problem.emi_target);
    }
    e.meets_emi_floor = e.emi > 1.0;
    // A degenerate spread is never silently admissible.
    e.admissible_robust = !e.degenerate_spread && e.emi >= problem.emi_target;
    e.admissible_reliable = !e.degenerate_spread && e.alpha_hat >= problem.alpha_target;
    e.skewness = dist.skewness;
    e.ex_kurtosis = dist.ex_kurtosis;
    return e;
}

std::vector<DesignEvaluation> sweep(const CdspProblem& problem) {
    problem.validate();
    const auto g = static_cast<std::size_t>(problem.grid_points);
    std::vector<DesignEvaluation> out(g);
    parallel_for(g, [&](std::size_t k) {
        const double t = problem.lo + (problem.hi - problem.lo) *
                                          static_cast<double>(k) /
                                          static_cast<double>(g - 1);
        const std::uint64_t point_seed = mix_key(problem.seed, kSweepTag,
                                                 static_cast<std::uint64_t>(k));
        try {
            out[k] = evaluate_design(problem, t, point_seed);
        } catch (const std::exception& err) {
            throw std::runtime_error("sweep: grid index " + std::to_string(k) + ": " +
                                     err.what());
        }
    });
    return out;
}

std::vector<GridInterval> admissible_set(const std::vector<DesignEvaluation>& sweep,
                                         ConstraintMode mode) {
    if (sweep.empty()) throw std::invalid_argument("admissible_set: empty sweep");
    std::vector<GridInterval> out;
    std::optional<std::size_t> run_start;
    for (std::size_t k = 0; k <= sweep.size(); ++k) {
        const bool flag = k < sweep.size() &&
                          (mode == ConstraintMode::Robust ? sweep[k].admissible_robust
                                                          : sweep[k].admissible_reliable);
        if (flag && !run_start) run_start = k;
        if (!flag && run_start) {
            out.push_back({*run_start, k - 1});
            run_start.reset();
        }
    }
    return out;
}

CdspSolution solve_from_sweep(const CdspProblem& problem,
                              std::vector<DesignEvaluation> sweep, ConstraintMode mode) {
    CdspSolution sol;
    sol.mode = mode;
    sol.admissible = admissible_set(sweep, mode);
    sol.sweep = std::move(sweep);

    std::optional<std::size_t> best;
    for (const auto& interval : sol.admissible) {
        for (std::size_t k = interval.first; k <= interval.last; ++k) {
            if (!best) {
                best = k;
                continue;
            }
            const auto& a = sol.sweep[k];
            const auto& b = sol.sweep[*best];
            if (a.d_minus < b.d_minus ||
                (a.d_minus == b.d_minus &&
                 (a.d_plus < b.d_plus ||
                  (a.d_plus == b.d_plus && a.design_value < b.design_value))))
                best = k;
        }
    }
    (void)problem;
    if (best) {
        const auto& e = sol.sweep[*best];
        sol.feasible = true;
        sol.optimal_index = *best;
        sol.optimal_design = e.design_value;
        sol.d_minus = e.d_minus;
        sol.d_plus = e.d_plus;
        sol.alpha_achieved = e.alpha_hat;
    }
    return sol;
}

CdspSolution solve(const CdspProblem& problem, ConstraintMode mode) {
    return solve_from_sweep(problem, sweep(problem), mode);
}

const char* const kSweepCsvHeader =
    "design_value,f_hat,sigma_pr,sigma_pa,emi,phi_emi,alpha_hat,"
    "d_minus,d_plus,admissible_robust,admissible_reliable,skewness,ex_kurtosis";

std::string sweep_csv_row(const DesignEvaluation& e) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%d,%d,%.12g,%.12g",
                  e.design_value, e.f_hat, e.sigma_pr, e.sigma_pa, e.emi, e.phi_emi,
                  e.alpha_hat, e.d_minus, e.d_plus, e.admissible_robust ? 1 : 0,
                  e.admissible_reliable ? 1 : 0, e.skewness, e.ex_kurtosis);
    return buf;
}

} // namespace rrcdsp::decision
