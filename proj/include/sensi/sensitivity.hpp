#pragma once

// Single-outcome sensitivity analysis at a given Gamma: binary-confounder
// candidate sets per stratum, the asymptotically separable selection, the
// exact quadratic-program path (the K = 1 case of the minimax solver), and
// worst-case p-values via a Dinkelbach iteration on the deviate ratio.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "sensi/design.hpp"
#include "sensi/error.hpp"
#include "sensi/minimax.hpp"
#include "sensi/normal.hpp"
#include "sensi/randomization.hpp"
#include "sensi/stats.hpp"

namespace sensi {

struct Candidate {
    std::vector<std::uint8_t> pattern; // binary u over the stratum
    double mean = 0.0;
    double variance = 0.0;
};

// Binary-confounder candidates for one stratum: cuts over the scores sorted
// descending (top-c members get u = 1) and ascending, plus the uniform
// pattern. At Gamma = 1 everything collapses to the uniform candidate.
inline std::vector<Candidate> stratum_candidates(const std::vector<double>& q,
                                                 const GammaValue& gamma) {
    const int n = static_cast<int>(q.size());
    std::vector<Candidate> out;
    auto push = [&](const std::vector<std::uint8_t>& u) {
        Candidate c;
        c.pattern = u;
        double wsum = 0.0, m1 = 0.0, m2 = 0.0;
        for (int j = 0; j < n; ++j) {
            double w = u[static_cast<std::size_t>(j)] ? gamma.value : 1.0;
            wsum += w;
            m1 += w * q[static_cast<std::size_t>(j)];
            m2 += w * q[static_cast<std::size_t>(j)] * q[static_cast<std::size_t>(j)];
        }
        c.mean = m1 / wsum;
        c.variance = m2 / wsum - c.mean * c.mean;
        out.push_back(std::move(c));
    };

    push(std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0));
    if (gamma.value == 1.0) return out;

    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return q[static_cast<std::size_t>(a)] > q[static_cast<std::size_t>(b)]; });
    for (int rev = 0; rev < 2; ++rev) {
        for (int c = 1; c <= n - 1; ++c) {
            std::vector<std::uint8_t> u(static_cast<std::size_t>(n), 0);
            for (int j = 0; j < c; ++j) {
                int pos = rev ? idx[static_cast<std::size_t>(n - 1 - j)]
                              : idx[static_cast<std::size_t>(j)];
                u[static_cast<std::size_t>(pos)] = 1;
            }
            push(u);
        }
    }
    return out;
}

struct WorstCaseBound {
    double gamma = 1.0;
    bool maximize = true;
    double mean = 0.0;
    double variance = 0.0;
    double deviate = 0.0;
    std::vector<int> selected; // candidate index per stratum
};

// Asymptotically separable candidate selection: per stratum pick the extreme
// mean in the requested direction, breaking ties toward larger variance.
inline WorstCaseBound separable_worst_case(const ScoreMatrix& scores,
                                           const MatchedDesign& design, int k,
                                           const GammaValue& gamma, bool maximize) {
    const auto& q = scores.columns[static_cast<std::size_t>(k)];
    const auto offsets = design.member_offsets();
    WorstCaseBound bound;
    bound.gamma = gamma.value;
    bound.maximize = maximize;
    for (int i = 0; i < design.stratum_count(); ++i) {
        const int off = offsets[static_cast<std::size_t>(i)];
        const int n = design.strata[static_cast<std::size_t>(i)].size();
        std::vector<double> qi(q.begin() + off, q.begin() + off + n);
        auto cands = stratum_candidates(qi, gamma);
        int best = 0;
        for (std::size_t c = 1; c < cands.size(); ++c) {
            double dm = cands[c].mean - cands[static_cast<std::size_t>(best)].mean;
            bool better = maximize ? dm > 0.0 : dm < 0.0;
            bool tie = dm == 0.0 &&
                       cands[c].variance > cands[static_cast<std::size_t>(best)].variance;
            if (better || tie) best = static_cast<int>(c);
        }
        bound.mean += cands[static_cast<std::size_t>(best)].mean;
        bound.variance += cands[static_cast<std::size_t>(best)].variance;
        bound.selected.push_back(best);
    }
    if (!(bound.variance > 0.0))
        throw input_error("degenerate statistic: zero worst-case variance");
    bound.deviate =
        (scores.t_obs[static_cast<std::size_t>(k)] - bound.mean) / std::sqrt(bound.variance);
    return bound;
}

// Assignment probabilities of a separable selection (for warm starts and
// feasible-point evaluations).
inline std::vector<double> separable_rho(const ScoreMatrix& scores, const MatchedDesign& design,
                                         int k, const GammaValue& gamma, bool maximize) {
    const auto& q = scores.columns[static_cast<std::size_t>(k)];
    const auto offsets = design.member_offsets();
    std::vector<double> rho;
    for (int i = 0; i < design.stratum_count(); ++i) {
        const int off = offsets[static_cast<std::size_t>(i)];
        const int n = design.strata[static_cast<std::size_t>(i)].size();
        std::vector<double> qi(q.begin() + off, q.begin() + off + n);
        auto cands = stratum_candidates(qi, gamma);
        int best = 0;
        for (std::size_t c = 1; c < cands.size(); ++c) {
            double dm = cands[c].mean - cands[static_cast<std::size_t>(best)].mean;
            if ((maximize ? dm > 0.0 : dm < 0.0) ||
                (dm == 0.0 && cands[c].variance > cands[static_cast<std::size_t>(best)].variance))
                best = static_cast<int>(c);
        }
        double wsum = 0.0;
        for (int j = 0; j < n; ++j)
            wsum += cands[static_cast<std::size_t>(best)].pattern[static_cast<std::size_t>(j)]
                        ? gamma.value
                        : 1.0;
        for (int j = 0; j < n; ++j)
            rho.push_back(
                (cands[static_cast<std::size_t>(best)].pattern[static_cast<std::size_t>(j)]
                     ? gamma.value
                     : 1.0) /
                wsum);
    }
    return rho;
}

struct SingleOutcomeResult {
    double zeta_star = 0.0;          // optimal zeta value; reject iff >= 0
    AssignmentProbabilities rho_star;
    bool reject = false;
    bool converged = true;
};

// Problem (H_k): minimize zeta_k over the feasible polytope, the K = 1 case
// of the minimax engine.
inline SingleOutcomeResult single_outcome_qp(const ScoreMatrix& scores,
                                             const MatchedDesign& design, int k,
                                             const GammaValue& gamma, double alpha_local,
                                             Alternative alt = Alternative::two_sided,
                                             const SolverConfig& config = {}) {
    if (!(alpha_local > 0.0 && alpha_local < 1.0))
        throw input_error("alpha must be in (0, 1)");
    std::vector<Alternative> alts(static_cast<std::size_t>(scores.outcome_count()),
                                  Alternative::two_sided);
    alts[static_cast<std::size_t>(k)] = alt;
    MinimaxProblem problem =
        make_minimax_problem(scores, design, {k}, gamma, alpha_local, alts);
    MinimaxSolution sol = solve_minimax(problem, config);
    SingleOutcomeResult out;
    out.zeta_star = sol.y;
    out.rho_star = sol.assignment;
    out.reject = sol.reject;
    out.converged = sol.converged;
    return out;
}

// Worst-case squared deviate min_rho (t - mean)^2 / variance via Dinkelbach:
// F(c) = min (t - mean)^2 - c * variance is concave decreasing in c and its
// root is the optimal ratio; each inner problem is a single-outcome solve.
inline double worst_case_squared_deviate(const ScoreMatrix& scores, const MatchedDesign& design,
                                         int k, const GammaValue& gamma,
                                         const SolverConfig& config = {}) {
    std::vector<Alternative> alts(static_cast<std::size_t>(scores.outcome_count()),
                                  Alternative::two_sided);
    MinimaxProblem problem = make_minimax_problem(scores, design, {k}, gamma, 0.5, alts);
    auto& outcome = problem.outcomes.front();

    MomentPair uni = uniform_moments(scores, design, k);
    if (!(uni.variance > 0.0)) throw input_error("degenerate statistic: zero variance");
    double c = squared_deviate(outcome.t_obs, uni);
    for (int it = 0; it < 60; ++it) {
        outcome.threshold = c;
        MinimaxSolution sol = solve_minimax(problem, config);
        MomentPair m = problem_moments(problem, 0, sol.assignment.rho);
        double centered = outcome.t_obs - m.mean;
        double numerator = centered * centered;
        if (!(m.variance > 0.0)) {
            // worst case pinned at a zero-variance corner: ratio unbounded
            // unless the numerator vanishes as well
            if (numerator <= 1e-18) return 0.0;
            break;
        }
        double next = numerator / m.variance;
        if (std::fabs(next - c) <= 1e-12 * std::max(1.0, c)) return next;
        c = next;
    }
    return c;
}

// Worst-case p-value for one outcome (the Holm baseline input). Two-sided and
// direction-respecting one-sided cases use the exact Dinkelbach path; if a
// one-sided alternative's direction can be violated inside the polytope the
// worst case exceeds 1/2 and is reported from the separable extreme-mean
// candidate.
inline double worst_case_pvalue(const ScoreMatrix& scores, const MatchedDesign& design, int k,
                                const GammaValue& gamma, Alternative alt,
                                const SolverConfig& config = {}) {
    const double t = scores.t_obs[static_cast<std::size_t>(k)];
    if (alt == Alternative::two_sided) {
        WorstCaseBound up = separable_worst_case(scores, design, k, gamma, true);
        WorstCaseBound down = separable_worst_case(scores, design, k, gamma, false);
        if (t <= up.mean && t >= down.mean) return 1.0; // mean range covers t
        double d2 = worst_case_squared_deviate(scores, design, k, gamma, config);
        return std::min(1.0, 2.0 * normal_sf(std::sqrt(std::max(0.0, d2))));
    }
    bool greater = alt == Alternative::greater;
    WorstCaseBound extreme = separable_worst_case(scores, design, k, gamma, greater);
    if ((greater && extreme.mean >= t) || (!greater && extreme.mean <= t)) {
        // direction violated at the extreme: the sensitivity analysis cannot
        // reject at any usual level
        return greater ? normal_sf(extreme.deviate) : normal_cdf(extreme.deviate);
    }
    double d2 = worst_case_squared_deviate(scores, design, k, gamma, config);
    double d = std::sqrt(std::max(0.0, d2));
    return normal_sf(d);
}

} // namespace sensi
