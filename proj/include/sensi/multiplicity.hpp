#pragma once

// Multiple-outcome machinery above the per-test level: Holm step-down on
// worst-case p-values, the generic sequential rejection engine
// R_{a+1} = R_a ∪ N(R_a), closed testing driven by minimax intersection
// tests, and the bisection search for the Gamma changepoint.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sensi/error.hpp"
#include "sensi/minimax.hpp"
#include "sensi/sensitivity.hpp"

namespace sensi {

struct HolmResult {
    std::vector<bool> reject;
    bool overall = false; // min_k p_k <= alpha / K
};

inline HolmResult holm_combine(const std::vector<double>& pvalues, double alpha) {
    const int k_count = static_cast<int>(pvalues.size());
    for (double p : pvalues)
        if (!(p >= 0.0 && p <= 1.0)) throw input_error("p-values must lie in [0, 1]");
    std::vector<int> order(static_cast<std::size_t>(k_count));
    for (int i = 0; i < k_count; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return pvalues[static_cast<std::size_t>(a)] < pvalues[static_cast<std::size_t>(b)];
    });
    HolmResult out;
    out.reject.assign(static_cast<std::size_t>(k_count), false);
    for (int step = 0; step < k_count; ++step) {
        double level = alpha / static_cast<double>(k_count - step);
        if (pvalues[static_cast<std::size_t>(order[static_cast<std::size_t>(step)])] <= level)
            out.reject[static_cast<std::size_t>(order[static_cast<std::size_t>(step)])] = true;
        else
            break;
    }
    if (k_count > 0)
        out.overall = *std::min_element(pvalues.begin(), pvalues.end()) <=
                      alpha / static_cast<double>(k_count);
    return out;
}

struct IntersectionNull {
    std::vector<int> outcomes; // sorted subset of {0..K-1}

    bool contains(int k) const {
        return std::find(outcomes.begin(), outcomes.end(), k) != outcomes.end();
    }
    bool superset_of(const IntersectionNull& other) const {
        for (int k : other.outcomes)
            if (!contains(k)) return false;
        return true;
    }
};

struct RejectionState {
    std::vector<bool> rejected; // indexed like the hypothesis list
    int step = 0;
};

using IntersectionTester = std::function<bool(const IntersectionNull&)>;
// Given the current rejected set, which hypotheses become rejectable next.
using SuccessorRule = std::function<std::vector<std::size_t>(
    const std::vector<IntersectionNull>&, const std::vector<bool>&, const IntersectionTester&)>;

struct RejectionTrace {
    std::vector<RejectionState> states; // one per step, final state last
    bool converged = true;

    const std::vector<bool>& final_rejected() const { return states.back().rejected; }
};

// Iterate R_{a+1} = R_a ∪ N(R_a) until the fixpoint; terminates within L
// steps because the rejected set grows monotonically.
inline RejectionTrace sequential_rejection(const std::vector<IntersectionNull>& hypotheses,
                                           const IntersectionTester& tester,
                                           const SuccessorRule& successor) {
    RejectionTrace trace;
    RejectionState state;
    state.rejected.assign(hypotheses.size(), false);
    state.step = 0;
    trace.states.push_back(state);
    for (std::size_t a = 0; a < hypotheses.size() + 1; ++a) {
        std::vector<std::size_t> next = successor(hypotheses, state.rejected, tester);
        bool grew = false;
        for (std::size_t idx : next) {
            if (!state.rejected[idx]) {
                state.rejected[idx] = true;
                grew = true;
            }
        }
        if (!grew) break;
        ++state.step;
        trace.states.push_back(state);
    }
    return trace;
}

// Closed-testing successor: an intersection becomes rejectable once every
// strict superset in the family is rejected and its own local test rejects.
// The tester is only invoked when the supersets are done, so a failed overall
// test stops the procedure after one round of work.
inline SuccessorRule closed_testing_rule() {
    return [](const std::vector<IntersectionNull>& hypotheses, const std::vector<bool>& rejected,
              const IntersectionTester& tester) {
        std::vector<std::size_t> out;
        for (std::size_t l = 0; l < hypotheses.size(); ++l) {
            if (rejected[l]) continue;
            bool ready = true;
            for (std::size_t m = 0; m < hypotheses.size(); ++m) {
                if (m == l || rejected[m]) continue;
                if (hypotheses[m].superset_of(hypotheses[l]) &&
                    hypotheses[m].outcomes.size() > hypotheses[l].outcomes.size()) {
                    ready = false;
                    break;
                }
            }
            if (ready && tester(hypotheses[l])) out.push_back(l);
        }
        return out;
    };
}

inline std::vector<IntersectionNull> all_intersections(int k_count) {
    if (k_count > 12) throw cap_error("closed testing capped at K = 12 outcomes");
    std::vector<IntersectionNull> out;
    for (unsigned mask = 1; mask < (1u << k_count); ++mask) {
        IntersectionNull h;
        for (int k = 0; k < k_count; ++k)
            if (mask & (1u << k)) h.outcomes.push_back(k);
        out.push_back(std::move(h));
    }
    // larger subsets first so ready-checks succeed in few passes
    std::stable_sort(out.begin(), out.end(), [](const IntersectionNull& a, const IntersectionNull& b) {
        return a.outcomes.size() > b.outcomes.size();
    });
    return out;
}

struct ClosedTestingResult {
    std::vector<bool> reject_outcome;           // H_k rejected with FWER control
    std::vector<IntersectionNull> hypotheses;   // family, largest subsets first
    std::vector<bool> rejected;                 // closed-sense claims per hypothesis
    std::vector<double> y_values;               // local minimax optimum, NaN if untested
    RejectionTrace trace;
};

// Reject H_k iff every intersection containing k rejects its local level-alpha
// minimax test. Local tests are solved lazily and memoized.
inline ClosedTestingResult closed_testing(const ScoreMatrix& scores, const MatchedDesign& design,
                                          const GammaValue& gamma, double alpha,
                                          const std::vector<Alternative>& alternatives,
                                          const SolverConfig& config = {}) {
    const int k_count = scores.outcome_count();
    ClosedTestingResult result;
    result.hypotheses = all_intersections(k_count);
    result.y_values.assign(result.hypotheses.size(),
                           std::numeric_limits<double>::quiet_NaN());

    std::map<std::vector<int>, bool> memo;
    IntersectionTester tester = [&](const IntersectionNull& h) {
        auto it = memo.find(h.outcomes);
        if (it != memo.end()) return it->second;
        MinimaxProblem problem =
            make_minimax_problem(scores, design, h.outcomes, gamma, alpha, alternatives);
        MinimaxSolution sol = solve_minimax(problem, config);
        for (std::size_t l = 0; l < result.hypotheses.size(); ++l)
            if (result.hypotheses[l].outcomes == h.outcomes)
                result.y_values[l] = sol.y;
        memo[h.outcomes] = sol.reject;
        return sol.reject;
    };

    result.trace = sequential_rejection(result.hypotheses, tester, closed_testing_rule());
    result.rejected = result.trace.final_rejected();
    result.reject_outcome.assign(static_cast<std::size_t>(k_count), false);
    for (std::size_t l = 0; l < result.hypotheses.size(); ++l) {
        if (result.hypotheses[l].outcomes.size() == 1 && result.rejected[l])
            result.reject_outcome[static_cast<std::size_t>(result.hypotheses[l].outcomes[0])] =
                true;
    }
    return result;
}

struct GammaChangepoint {
    double gamma_star = 1.0;  // smallest Gamma at which rejection is overturned
    double bracket = 0.0;     // reject holds at gamma_star - bracket, fails at + bracket
    std::string method;
    bool hit_cap = false;     // still rejecting at the expansion cap
    bool rejects_at_one = true;
    bool anomaly = false;     // non-monotone flips observed among evaluations
    std::vector<std::pair<double, bool>> evaluations;
};

// Smallest Gamma at which reject_at flips to false: doubling expansion then
// bisection to the requested bracket width.
inline GammaChangepoint gamma_star(const std::function<bool(double)>& reject_at,
                                   const std::string& method_tag = "", double gamma_lo = 1.0,
                                   double gamma_hi = 2.0, double tol = 1e-3,
                                   double cap = 1e6) {
    GammaChangepoint out;
    out.method = method_tag;
    auto probe = [&](double g) {
        bool r = reject_at(g);
        out.evaluations.emplace_back(g, r);
        return r;
    };
    if (!probe(gamma_lo)) {
        out.rejects_at_one = false;
        out.gamma_star = gamma_lo;
        out.bracket = 0.0;
        return out;
    }
    double lo = gamma_lo, hi = std::max(gamma_hi, gamma_lo * 2.0);
    while (probe(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > cap) {
            out.hit_cap = true;
            out.gamma_star = cap;
            out.bracket = 0.0;
            return out;
        }
    }
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        if (probe(mid))
            lo = mid;
        else
            hi = mid;
    }
    out.gamma_star = 0.5 * (lo + hi);
    out.bracket = 0.5 * (hi - lo);
    // flag flips that contradict monotone rejection regions
    double smallest_fail = std::numeric_limits<double>::infinity();
    for (const auto& [g, r] : out.evaluations)
        if (!r) smallest_fail = std::min(smallest_fail, g);
    for (const auto& [g, r] : out.evaluations)
        if (r && g > smallest_fail) out.anomaly = true;
    return out;
}

} // namespace sensi
