#pragma once

// Orchestration for a full dataset analysis: baseline inference at Gamma = 1,
// per-Gamma decisions for the separate/Holm, minimax and closed-testing
// methods, changepoint searches with warm starts, and oracle certification of
// solver results at desk scale.

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sensi/design.hpp"
#include "sensi/minimax.hpp"
#include "sensi/multiplicity.hpp"
#include "sensi/oracle.hpp"
#include "sensi/randomization.hpp"
#include "sensi/sensitivity.hpp"
#include "sensi/stats.hpp"

namespace sensi {

struct AnalysisOptions {
    double alpha = 0.05;
    std::vector<double> gamma_grid = {1.0, 1.25, 1.5, 1.75, 2.0};
    bool gamma_search = false;
    double search_tol = 1e-3;
    bool run_separate = true;
    bool run_minimax = true;
    bool run_closed = true;
    std::uint64_t exact_cap = 1u << 16; // enumerate when |Omega| is below this
    int certify_n_cap = 8;              // grid-certify solver results up to this N
    int certify_k_cap = 3;
    SolverConfig solver;
};

struct OutcomeBaseline {
    std::string name;
    StatKind stat;
    Alternative alternative;
    double t_obs = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    double deviate = 0.0;
    double p_two_sided = 1.0;
    double p_greater = 1.0;
    double p_less = 1.0;
    bool exact_available = false;
    double exact_p_greater_equal = 0.0; // P(T >= t) by enumeration
    std::uint64_t assignments = 0;
};

struct GammaDecision {
    double gamma = 1.0;
    // separate method: per-outcome worst-case p-values and Holm
    std::vector<double> worst_case_pvalues;
    std::vector<double> single_zeta; // min zeta_k at local level alpha/K
    HolmResult holm;
    bool separate_overall = false; // Bonferroni on the worst-case p-values
    // minimax method
    double minimax_y = 0.0;
    bool minimax_reject = false;
    std::vector<double> u_star;
    std::vector<double> minimax_zetas;
    std::string certificate = "multistart-only";
    double certified_gap = std::numeric_limits<double>::quiet_NaN();
    // closed testing
    bool closed_ran = false;
    std::vector<bool> closed_reject;
};

struct AnalysisResult {
    std::vector<OutcomeBaseline> baselines;
    std::vector<GammaDecision> decisions;
    std::vector<GammaChangepoint> changepoints; // separate / minimax / closed per outcome
    bool solver_converged = true;
    std::vector<std::string> notes;
};

// Grid-certify a minimax solution when the instance is small enough; the
// oracle path recomputes everything independently.
inline MinimaxSolution solve_with_certificate(const MinimaxProblem& problem,
                                              const SolverConfig& config, int n_cap = 8,
                                              int k_cap = 3) {
    MinimaxSolution sol = solve_minimax(problem, config);
    if (problem.total() <= n_cap && problem.outcome_count() <= k_cap) {
        oracle::OracleResult check = oracle::grid_minimax(problem, 21, 3, n_cap, k_cap);
        sol.certificate = MinimaxSolution::Certificate::certified_by_grid;
        sol.certified_gap = std::fabs(sol.y - check.value);
    }
    return sol;
}

inline AnalysisResult run_analysis(const MatchedDesign& design, const ScoreMatrix& scores,
                                   const std::vector<Alternative>& alternatives,
                                   const AnalysisOptions& options) {
    const int k_count = scores.outcome_count();
    AnalysisResult result;

    for (int k = 0; k < k_count; ++k) {
        OutcomeBaseline b;
        b.name = design.outcome_names[static_cast<std::size_t>(k)];
        b.stat = scores.kinds[static_cast<std::size_t>(k)];
        b.alternative = alternatives[static_cast<std::size_t>(k)];
        b.t_obs = scores.t_obs[static_cast<std::size_t>(k)];
        MomentPair m = uniform_moments(scores, design, k);
        b.mean = m.mean;
        b.variance = m.variance;
        b.deviate = deviate(b.t_obs, m);
        b.p_two_sided = two_sided_pvalue(b.deviate);
        b.p_greater = normal_sf(b.deviate);
        b.p_less = normal_cdf(b.deviate);
        if (design.assignment_count(options.exact_cap) <= options.exact_cap) {
            ExactTail tail =
                exact_tail_probability(scores, design, k, b.t_obs, options.exact_cap);
            b.exact_available = true;
            b.exact_p_greater_equal = tail.probability;
            b.assignments = tail.assignments;
        }
        result.baselines.push_back(std::move(b));
    }

    std::vector<int> all_outcomes;
    for (int k = 0; k < k_count; ++k) all_outcomes.push_back(k);

    auto decide = [&](double gamma_value, SolverConfig& config) {
        GammaDecision d;
        d.gamma = gamma_value;
        GammaValue gamma(gamma_value);
        if (options.run_separate) {
            for (int k = 0; k < k_count; ++k) {
                d.worst_case_pvalues.push_back(worst_case_pvalue(
                    scores, design, k, gamma, alternatives[static_cast<std::size_t>(k)],
                    config));
                SingleOutcomeResult single = single_outcome_qp(
                    scores, design, k, gamma, options.alpha / k_count,
                    alternatives[static_cast<std::size_t>(k)], config);
                d.single_zeta.push_back(single.zeta_star);
                if (!single.converged) result.solver_converged = false;
            }
            d.holm = holm_combine(d.worst_case_pvalues, options.alpha);
            d.separate_overall = false;
            for (double p : d.worst_case_pvalues)
                if (p <= options.alpha / k_count) d.separate_overall = true;
        }
        if (options.run_minimax) {
            MinimaxProblem problem = make_minimax_problem(scores, design, all_outcomes, gamma,
                                                          options.alpha, alternatives);
            MinimaxSolution sol = solve_with_certificate(problem, config, options.certify_n_cap,
                                                         options.certify_k_cap);
            d.minimax_y = sol.y;
            d.minimax_reject = sol.reject;
            d.u_star = sol.u;
            d.minimax_zetas = sol.zeta_values;
            d.certificate = sol.certificate == MinimaxSolution::Certificate::certified_by_grid
                                ? "certified-by-grid"
                                : "multistart-only";
            d.certified_gap = sol.certified_gap;
            if (!sol.converged) result.solver_converged = false;
            config.warm_start_confounders = {sol.u};
        }
        if (options.run_closed && k_count <= 12) {
            ClosedTestingResult closed =
                closed_testing(scores, design, gamma, options.alpha, alternatives, config);
            d.closed_ran = true;
            d.closed_reject = closed.reject_outcome;
        }
        return d;
    };

    SolverConfig grid_config = options.solver;
    for (double g : options.gamma_grid) result.decisions.push_back(decide(g, grid_config));

    if (options.gamma_search) {
        auto search = [&](const std::string& tag, const std::function<bool(double)>& reject) {
            result.changepoints.push_back(
                gamma_star(reject, tag, 1.0, 2.0, options.search_tol));
        };
        if (options.run_separate) {
            SolverConfig config = options.solver;
            search("separate-holm", [&](double g) {
                GammaValue gamma(g);
                for (int k = 0; k < k_count; ++k) {
                    SingleOutcomeResult single = single_outcome_qp(
                        scores, design, k, gamma, options.alpha / k_count,
                        alternatives[static_cast<std::size_t>(k)], config);
                    if (single.reject) return true;
                }
                return false;
            });
        }
        if (options.run_minimax) {
            SolverConfig config = options.solver;
            search("minimax", [&](double g) {
                GammaValue gamma(g);
                MinimaxProblem problem = make_minimax_problem(scores, design, all_outcomes,
                                                              gamma, options.alpha, alternatives);
                MinimaxSolution sol = solve_minimax(problem, config);
                config.warm_start_confounders = {sol.u};
                return sol.reject;
            });
        }
        if (options.run_closed && k_count <= 12) {
            for (int k = 0; k < k_count; ++k) {
                SolverConfig config = options.solver;
                search("closed-" + design.outcome_names[static_cast<std::size_t>(k)],
                       [&, k](double g) -> bool {
                           GammaValue gamma(g);
                           ClosedTestingResult closed = closed_testing(
                               scores, design, gamma, options.alpha, alternatives, config);
                           return closed.reject_outcome[static_cast<std::size_t>(k)];
                       });
            }
        }
    }
    return result;
}

} // namespace sensi
