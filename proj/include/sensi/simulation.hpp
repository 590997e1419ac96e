#pragma once

// Monte Carlo power and familywise-error studies on paired designs: draw
// multivariate-normal paired differences, run the separate/Holm combination,
// the minimax overall test, and closed testing per Gamma, and aggregate
// rejection frequencies with Monte Carlo standard errors.
//
// Replicate-wise bookkeeping keeps two orderings exact by construction:
// every solved assignment-probability vector enters a shared pool of feasible
// points, and every single-outcome bound is the minimum of its own solve and
// the pool evaluations. Any Bonferroni rejection then forces the matching
// minimax rejection, and Holm rejections force closed-testing rejections.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sensi/design.hpp"
#include "sensi/error.hpp"
#include "sensi/minimax.hpp"
#include "sensi/multiplicity.hpp"
#include "sensi/rng.hpp"
#include "sensi/sensitivity.hpp"
#include "sensi/stats.hpp"
#include "sensi/threads.hpp"

namespace sensi {

enum class Method { separate, minimax, closed_testing };

struct SimulationScenario {
    std::string name = "custom";
    int pairs = 250;
    std::vector<double> tau;                // K treatment effect means
    std::vector<std::vector<double>> sigma; // K x K covariance
    std::vector<double> gammas = {1.25, 1.5};
    double alpha = 0.05;
    StatKind stat = StatKind::huber_m;
    double huber_trunc = 2.5;
    int replications = 1000;
    std::uint64_t seed = 20240501;
    std::vector<Method> methods = {Method::separate, Method::minimax};
    int threads = 0; // 0 resolves to SENSI_THREADS or the hardware count

    int outcomes() const { return static_cast<int>(tau.size()); }

    bool has(Method m) const {
        return std::find(methods.begin(), methods.end(), m) != methods.end();
    }

    void validate() const {
        if (pairs < 1) throw input_error("scenario needs at least one pair");
        if (tau.empty()) throw input_error("scenario needs at least one outcome");
        if (sigma.size() != tau.size()) throw input_error("sigma dimension mismatch");
        for (const auto& row : sigma)
            if (row.size() != tau.size()) throw input_error("sigma is not square");
        if (replications < 1) throw input_error("need at least one replication");
        for (double g : gammas)
            if (!(g >= 1.0)) throw input_error("gamma values must be >= 1");
        if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("alpha must be in (0, 1)");
    }
};

inline std::vector<std::vector<double>> identity_covariance(int k) {
    std::vector<std::vector<double>> s(static_cast<std::size_t>(k),
                                       std::vector<double>(static_cast<std::size_t>(k), 0.0));
    for (int i = 0; i < k; ++i) s[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
    return s;
}

inline std::vector<std::vector<double>> exchangeable_covariance(int k, double rho) {
    auto s = identity_covariance(k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
            if (i != j) s[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = rho;
    return s;
}

namespace detail {

inline std::vector<std::vector<double>> cholesky(const std::vector<std::vector<double>>& a) {
    const int n = static_cast<int>(a.size());
    std::vector<std::vector<double>> l(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            for (int t = 0; t < j; ++t)
                sum -= l[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)] *
                       l[static_cast<std::size_t>(j)][static_cast<std::size_t>(t)];
            if (i == j) {
                if (!(sum > 0.0))
                    throw input_error("covariance matrix is not positive definite");
                l[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::sqrt(sum);
            } else {
                l[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                    sum / l[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)];
            }
        }
    }
    return l;
}

} // namespace detail

// I x K matrix of treated-minus-control paired differences, multivariate
// normal with mean tau and covariance sigma; deterministic in (seed, rep).
inline std::vector<std::vector<double>> generate_paired_differences(
    const SimulationScenario& scenario, long rep) {
    const std::vector<std::vector<double>> chol = detail::cholesky(scenario.sigma);
    const int k_count = scenario.outcomes();
    Rng rng(scenario.seed, static_cast<std::uint64_t>(rep));
    std::vector<std::vector<double>> d(static_cast<std::size_t>(scenario.pairs),
                                       std::vector<double>(static_cast<std::size_t>(k_count)));
    std::vector<double> z(static_cast<std::size_t>(k_count));
    for (int i = 0; i < scenario.pairs; ++i) {
        for (int k = 0; k < k_count; ++k) z[static_cast<std::size_t>(k)] = rng.normal();
        for (int k = 0; k < k_count; ++k) {
            double v = scenario.tau[static_cast<std::size_t>(k)];
            for (int t = 0; t <= k; ++t)
                v += chol[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)] *
                     z[static_cast<std::size_t>(t)];
            d[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = v;
        }
    }
    return d;
}

// Paired design whose first member (treated) carries the differences and the
// second zeros: pair differences reproduce D exactly.
inline MatchedDesign pairs_design_from_differences(const std::vector<std::vector<double>>& d) {
    MatchedDesign design;
    const int k_count = d.empty() ? 0 : static_cast<int>(d.front().size());
    for (int k = 0; k < k_count; ++k) design.outcome_names.push_back("y" + std::to_string(k + 1));
    for (std::size_t i = 0; i < d.size(); ++i) {
        Stratum s;
        s.id = "p" + std::to_string(i + 1);
        s.treated = {1, 0};
        s.outcomes = {d[i], std::vector<double>(static_cast<std::size_t>(k_count), 0.0)};
        design.strata.push_back(std::move(s));
    }
    return design;
}

struct GammaPower {
    double gamma = 1.0;
    long reps = 0;
    long separate_overall = 0;
    long minimax_overall = 0;
    long closed_overall = 0;             // top intersection claim
    std::vector<long> holm_outcome;      // K (separate method, Holm step-down)
    std::vector<long> closed_outcome;    // K (closed testing with minimax)
    std::vector<long> closed_claim;      // 2^K-1 by subset mask, closed-sense claims
    long dominance_violations = 0;
    long ordering_violations = 0;
};

struct PowerReport {
    SimulationScenario scenario;
    std::vector<GammaPower> rows;
    long solver_failures = 0;
    bool power_monotone_in_gamma = true;
    std::vector<std::string> notes;

    static double rate(long count, long reps) {
        return reps > 0 ? static_cast<double>(count) / static_cast<double>(reps) : 0.0;
    }
    static double mc_se(long count, long reps) {
        if (reps <= 0) return 0.0;
        double p = rate(count, reps);
        return std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
    }
};

namespace detail {

// All decisions for one replicate at one Gamma, sharing a pool of feasible
// points so that Bonferroni => minimax and Holm ⊆ closed hold by construction.
struct ReplicateLab {
    const ScoreMatrix& scores;
    const MatchedDesign& design;
    GammaValue gamma;
    double alpha;
    SolverConfig config;
    int k_count;

    std::vector<std::vector<double>> pool; // feasible assignment vectors
    std::map<std::pair<int, int>, double> single_raw; // (outcome, level divisor) -> solve value
    std::map<unsigned, double> minimax_raw;           // subset mask -> solver y
    std::vector<Alternative> alts;

    ReplicateLab(const ScoreMatrix& s, const MatchedDesign& d, double g, double a,
                 const SolverConfig& c)
        : scores(s), design(d), gamma(g), alpha(a), config(c), k_count(s.outcome_count()),
          alts(static_cast<std::size_t>(s.outcome_count()), Alternative::two_sided) {}

    double zeta_at(int k, int level_divisor, const std::vector<double>& rho) const {
        const auto& q = scores.columns[static_cast<std::size_t>(k)];
        const auto offsets = design.member_offsets();
        double mean = 0.0, var = 0.0;
        for (int i = 0; i < design.stratum_count(); ++i) {
            int off = offsets[static_cast<std::size_t>(i)];
            MomentPair m = stratum_moments(q.data() + off, rho.data() + off,
                                           design.strata[static_cast<std::size_t>(i)].size());
            mean += m.mean;
            var += m.variance;
        }
        double centered = scores.t_obs[static_cast<std::size_t>(k)] - mean;
        double threshold =
            outcome_threshold(Alternative::two_sided, alpha, level_divisor);
        return centered * centered - threshold * var;
    }

    // min over own solve and every pooled feasible point
    double single_bound(int k, int level_divisor) {
        auto key = std::make_pair(k, level_divisor);
        auto it = single_raw.find(key);
        if (it == single_raw.end()) {
            SingleOutcomeResult r = single_outcome_qp(scores, design, k, gamma,
                                                      alpha / level_divisor,
                                                      Alternative::two_sided, config);
            pool.push_back(r.rho_star.rho);
            it = single_raw.emplace(key, r.zeta_star).first;
        }
        double v = it->second;
        for (const auto& rho : pool) v = std::min(v, zeta_at(k, level_divisor, rho));
        return v;
    }

    // minimax over the subset given by mask, tightened against the pool
    double minimax_bound(unsigned mask) {
        auto it = minimax_raw.find(mask);
        if (it == minimax_raw.end()) {
            std::vector<int> subset;
            for (int k = 0; k < k_count; ++k)
                if (mask & (1u << k)) subset.push_back(k);
            MinimaxProblem problem =
                make_minimax_problem(scores, design, subset, gamma, alpha, alts);
            MinimaxSolution sol = solve_minimax(problem, config);
            pool.push_back(sol.assignment.rho);
            it = minimax_raw.emplace(mask, sol.y).first;
        }
        double v = it->second;
        int m = 0;
        for (int k = 0; k < k_count; ++k)
            if (mask & (1u << k)) ++m;
        for (const auto& rho : pool) {
            double worst = -std::numeric_limits<double>::infinity();
            for (int k = 0; k < k_count; ++k)
                if (mask & (1u << k)) worst = std::max(worst, zeta_at(k, m, rho));
            v = std::min(v, worst);
        }
        return v;
    }

    // Holm step-down expressed through level tests: round by round, reject
    // every remaining outcome whose worst-case bound at level alpha/m clears
    // zero, m = number remaining.
    std::vector<bool> holm_flags() {
        std::vector<bool> rejected(static_cast<std::size_t>(k_count), false);
        while (true) {
            int remaining = 0;
            for (bool r : rejected)
                if (!r) ++remaining;
            if (remaining == 0) break;
            bool grew = false;
            for (int k = 0; k < k_count; ++k) {
                if (rejected[static_cast<std::size_t>(k)]) continue;
                if (single_bound(k, remaining) >= 0.0) {
                    rejected[static_cast<std::size_t>(k)] = true;
                    grew = true;
                }
            }
            if (!grew) break;
        }
        return rejected;
    }

    // Closed-sense claims per subset mask: local minimax tests of every
    // intersection, a claim holds when the subset and all supersets reject.
    std::vector<bool> closed_claims() {
        const unsigned all = (1u << k_count) - 1u;
        std::vector<bool> local(static_cast<std::size_t>(all) + 1, false);
        for (unsigned mask = 1; mask <= all; ++mask)
            local[mask] = minimax_bound(mask) >= 0.0;
        std::vector<bool> claim(static_cast<std::size_t>(all) + 1, false);
        for (unsigned mask = 1; mask <= all; ++mask) {
            bool ok = true;
            for (unsigned sup = mask; sup <= all && ok; sup = (sup + 1) | mask)
                if (!local[sup]) ok = false;
            claim[mask] = ok;
        }
        return claim;
    }
};

} // namespace detail

inline SolverConfig simulation_solver_profile(int pairs) {
    SolverConfig c;
    c.random_starts = 0;      // two-sided pair problems are convex
    c.separable_starts = false;
    c.temperature_schedule = {1e-2, 1e-4, 1e-6};
    c.iterations_per_temperature = 500;
    c.polish_passes = 80;
    c.pattern_search_max_total = 0;
    c.final_sharpening = false; // decision-level accuracy suffices here
    c.threads = 1;              // replicates parallelize above this level
    (void)pairs;
    return c;
}

inline PowerReport run_power_study(const SimulationScenario& scenario) {
    scenario.validate();
    const int k_count = scenario.outcomes();
    const int g_count = static_cast<int>(scenario.gammas.size());
    const bool want_closed = scenario.has(Method::closed_testing);
    const bool want_minimax = scenario.has(Method::minimax) || want_closed;

    struct RepOutcome {
        bool failed = false;
        std::vector<std::uint8_t> separate, minimax, closed_top;
        std::vector<std::vector<std::uint8_t>> holm, closed_k;
        std::vector<std::vector<std::uint8_t>> claims;
        long dominance_violations = 0, ordering_violations = 0;
    };
    std::vector<RepOutcome> outcomes(static_cast<std::size_t>(scenario.replications));

    SolverConfig config = simulation_solver_profile(scenario.pairs);

    parallel_for(static_cast<std::size_t>(scenario.replications), resolve_threads(scenario.threads),
                 [&](std::size_t rep) {
        RepOutcome& out = outcomes[rep];
        out.separate.assign(static_cast<std::size_t>(g_count), 0);
        out.minimax.assign(static_cast<std::size_t>(g_count), 0);
        out.closed_top.assign(static_cast<std::size_t>(g_count), 0);
        out.holm.assign(static_cast<std::size_t>(g_count),
                        std::vector<std::uint8_t>(static_cast<std::size_t>(k_count), 0));
        out.closed_k.assign(static_cast<std::size_t>(g_count),
                            std::vector<std::uint8_t>(static_cast<std::size_t>(k_count), 0));
        out.claims.assign(static_cast<std::size_t>(g_count),
                          std::vector<std::uint8_t>(1u << k_count, 0));
        try {
            auto d = generate_paired_differences(scenario, static_cast<long>(rep));
            MatchedDesign design = pairs_design_from_differences(d);
            HypothesisSpec spec = HypothesisSpec::sharp(k_count);
            OutcomeMatrix f = apply_hypothesis(design, spec);
            std::vector<StatKind> kinds(static_cast<std::size_t>(k_count), scenario.stat);
            ScoreOptions sopt;
            sopt.huber_trunc = scenario.huber_trunc;
            ScoreMatrix scores = build_scores(f, design, kinds, sopt);

            for (int g = 0; g < g_count; ++g) {
                detail::ReplicateLab lab(scores, design,
                                         scenario.gammas[static_cast<std::size_t>(g)],
                                         scenario.alpha, config);
                double y_full = 0.0;
                if (want_minimax) {
                    y_full = lab.minimax_bound((1u << k_count) - 1u);
                    out.minimax[static_cast<std::size_t>(g)] = y_full >= 0.0;
                }
                bool separate_overall = false;
                for (int k = 0; k < k_count; ++k)
                    if (lab.single_bound(k, k_count) >= 0.0) separate_overall = true;
                // re-query against the full pool (tightening only shrinks)
                if (separate_overall) {
                    separate_overall = false;
                    for (int k = 0; k < k_count; ++k)
                        if (lab.single_bound(k, k_count) >= 0.0) separate_overall = true;
                }
                out.separate[static_cast<std::size_t>(g)] = separate_overall;
                if (want_minimax) {
                    double y_final = lab.minimax_bound((1u << k_count) - 1u);
                    out.minimax[static_cast<std::size_t>(g)] = y_final >= 0.0;
                    if (separate_overall && y_final < 0.0) ++out.dominance_violations;
                }
                if (want_closed) {
                    auto claims = lab.closed_claims();
                    auto holm = lab.holm_flags();
                    out.closed_top[static_cast<std::size_t>(g)] =
                        claims[(1u << k_count) - 1u];
                    for (unsigned mask = 1; mask < (1u << k_count); ++mask)
                        out.claims[static_cast<std::size_t>(g)][mask] = claims[mask];
                    for (int k = 0; k < k_count; ++k) {
                        bool c = claims[1u << k];
                        bool h = holm[static_cast<std::size_t>(k)];
                        out.closed_k[static_cast<std::size_t>(g)][static_cast<std::size_t>(k)] = c;
                        out.holm[static_cast<std::size_t>(g)][static_cast<std::size_t>(k)] = h;
                        if (h && !c) ++out.ordering_violations;
                    }
                }
            }
        } catch (const std::exception&) {
            out.failed = true;
        }
    });

    PowerReport report;
    report.scenario = scenario;
    long failures = 0;
    for (const auto& o : outcomes)
        if (o.failed) ++failures;
    report.solver_failures = failures;
    if (failures * 100 > scenario.replications)
        throw solver_error("more than 1% of replicates failed (" + std::to_string(failures) +
                           " of " + std::to_string(scenario.replications) + ")");

    for (int g = 0; g < g_count; ++g) {
        GammaPower row;
        row.gamma = scenario.gammas[static_cast<std::size_t>(g)];
        row.holm_outcome.assign(static_cast<std::size_t>(k_count), 0);
        row.closed_outcome.assign(static_cast<std::size_t>(k_count), 0);
        row.closed_claim.assign((1u << k_count) - 1u, 0);
        for (const auto& o : outcomes) {
            if (o.failed) continue;
            ++row.reps;
            row.separate_overall += o.separate[static_cast<std::size_t>(g)];
            row.minimax_overall += o.minimax[static_cast<std::size_t>(g)];
            row.closed_overall += o.closed_top[static_cast<std::size_t>(g)];
            for (int k = 0; k < k_count; ++k) {
                row.holm_outcome[static_cast<std::size_t>(k)] +=
                    o.holm[static_cast<std::size_t>(g)][static_cast<std::size_t>(k)];
                row.closed_outcome[static_cast<std::size_t>(k)] +=
                    o.closed_k[static_cast<std::size_t>(g)][static_cast<std::size_t>(k)];
            }
            for (unsigned mask = 1; mask < (1u << k_count); ++mask)
                row.closed_claim[mask - 1] += o.claims[static_cast<std::size_t>(g)][mask];
            row.dominance_violations += o.dominance_violations;
            row.ordering_violations += o.ordering_violations;
        }
        report.rows.push_back(std::move(row));
    }

    // power should not increase with Gamma (2 MC standard errors of slack)
    auto monotone = [&](auto&& count_of) {
        for (std::size_t g = 1; g < report.rows.size(); ++g) {
            if (report.rows[g].gamma < report.rows[g - 1].gamma) continue;
            long a = count_of(report.rows[g - 1]), b = count_of(report.rows[g]);
            double se = PowerReport::mc_se(a, report.rows[g - 1].reps) +
                        PowerReport::mc_se(b, report.rows[g].reps);
            if (PowerReport::rate(b, report.rows[g].reps) >
                PowerReport::rate(a, report.rows[g - 1].reps) + 2.0 * se)
                return false;
        }
        return true;
    };
    report.power_monotone_in_gamma =
        monotone([](const GammaPower& r) { return r.separate_overall; }) &&
        (!want_minimax || monotone([](const GammaPower& r) { return r.minimax_overall; }));

    return report;
}

// Scenario files: one `key = value` per line, '#' comments. Keys: name,
// pairs, tau (comma list), sigma (identity | exchangeable RHO | rows
// r11 r12; r21 r22 ...), gammas, alpha, stat, huber-trunc, reps, seed,
// methods (comma list of separate, minimax, closed).
inline SimulationScenario parse_scenario_text(const std::string& text) {
    SimulationScenario s;
    s.methods = {Method::separate, Method::minimax};
    std::string line;
    std::istringstream in(text);
    auto split_list = [](const std::string& v) {
        std::vector<std::string> parts;
        std::string item;
        std::istringstream ss(v);
        while (std::getline(ss, item, ',')) {
            std::size_t b = item.find_first_not_of(" \t");
            std::size_t e = item.find_last_not_of(" \t");
            if (b != std::string::npos) parts.push_back(item.substr(b, e - b + 1));
        }
        return parts;
    };
    std::string sigma_spec = "identity";
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r\n") != std::string::npos)
                throw input_error("scenario line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
            continue;
        }
        auto trim = [](std::string v) {
            std::size_t b = v.find_first_not_of(" \t\r\n");
            if (b == std::string::npos) return std::string();
            std::size_t e = v.find_last_not_of(" \t\r\n");
            return v.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "name") s.name = value;
        else if (key == "pairs") s.pairs = std::stoi(value);
        else if (key == "reps") s.replications = std::stoi(value);
        else if (key == "seed") s.seed = std::stoull(value);
        else if (key == "alpha") s.alpha = std::stod(value);
        else if (key == "huber-trunc") s.huber_trunc = std::stod(value);
        else if (key == "tau") {
            s.tau.clear();
            for (const auto& t : split_list(value)) s.tau.push_back(std::stod(t));
        } else if (key == "gammas") {
            s.gammas.clear();
            for (const auto& g : split_list(value)) s.gammas.push_back(std::stod(g));
        } else if (key == "sigma") {
            sigma_spec = value;
        } else if (key == "stat") {
            if (value == "huber-m") s.stat = StatKind::huber_m;
            else if (value == "mean-diff") s.stat = StatKind::mean_difference;
            else if (value == "aligned-rank") s.stat = StatKind::aligned_rank;
            else if (value == "signed-rank") s.stat = StatKind::signed_rank;
            else throw input_error("scenario: unknown stat '" + value + "'");
        } else if (key == "methods") {
            s.methods.clear();
            for (const auto& m : split_list(value)) {
                if (m == "separate") s.methods.push_back(Method::separate);
                else if (m == "minimax") s.methods.push_back(Method::minimax);
                else if (m == "closed") s.methods.push_back(Method::closed_testing);
                else throw input_error("scenario: unknown method '" + m + "'");
            }
        } else {
            throw input_error("scenario: unknown key '" + key + "'");
        }
    }
    if (s.tau.empty()) throw input_error("scenario: tau is required");
    const int k = static_cast<int>(s.tau.size());
    if (sigma_spec == "identity") {
        s.sigma = identity_covariance(k);
    } else if (sigma_spec.rfind("exchangeable", 0) == 0) {
        double rho = std::stod(sigma_spec.substr(12));
        s.sigma = exchangeable_covariance(k, rho);
    } else if (sigma_spec.rfind("rows", 0) == 0) {
        s.sigma.clear();
        std::istringstream rows(sigma_spec.substr(4));
        std::string row;
        while (std::getline(rows, row, ';')) {
            std::vector<double> r;
            std::istringstream rs(row);
            double v;
            while (rs >> v) r.push_back(v);
            if (!r.empty()) s.sigma.push_back(std::move(r));
        }
    } else {
        throw input_error("scenario: unknown sigma spec '" + sigma_spec + "'");
    }
    s.validate();
    return s;
}

inline SimulationScenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open scenario file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str());
}

// Named presets covering the paper-style tau/sigma combinations.
inline SimulationScenario scenario_preset(const std::string& name) {
    SimulationScenario s;
    s.name = name;
    auto tau5 = [&](int idx) -> std::vector<double> {
        switch (idx) {
            case 1: return {0.25, 0.25, 0.25, 0.25, 0.25};
            case 2: return {0.25, 0.25, 0.25, 0.25, 0.0};
            case 3: return {0.3, 0.3, 0.0, 0.0, 0.0};
            case 4: return {0.3, 0.0, 0.0, 0.0, 0.0};
        }
        throw input_error("unknown tau index");
    };
    auto tau3 = [&](int idx) -> std::vector<double> {
        switch (idx) {
            case 1: return {0.2, 0.225, 0.25};
            case 2: return {0.25, 0.3, 0.35};
            case 3: return {0.2, 0.25, 0.35};
            case 4: return {0.15, 0.25, 0.35};
        }
        throw input_error("unknown tau index");
    };

    if (name.rfind("table1-t", 0) == 0 && name.size() == 12 && name.substr(9, 2) == "-s") {
        int t = name[8] - '0', sig = name[11] - '0';
        if (t < 1 || t > 4 || sig < 1 || sig > 2) throw input_error("unknown preset '" + name + "'");
        s.tau = tau5(t);
        s.sigma = sig == 1 ? identity_covariance(5) : exchangeable_covariance(5, 0.5);
        s.gammas = {1.25, 1.5, 1.75};
        s.methods = {Method::separate, Method::minimax};
        return s;
    }
    if (name.rfind("table2-t", 0) == 0 && name.size() == 12 && name.substr(9, 2) == "-s") {
        int t = name[8] - '0', sig = name[11] - '0';
        if (t < 1 || t > 4 || sig < 1 || sig > 2) throw input_error("unknown preset '" + name + "'");
        s.tau = tau3(t);
        s.sigma = sig == 1 ? identity_covariance(3) : exchangeable_covariance(3, 0.5);
        s.gammas = {1.25, 1.375, 1.5};
        s.methods = {Method::separate, Method::minimax, Method::closed_testing};
        return s;
    }
    if (name == "appc-s1" || name == "appc-s2") {
        s.tau = {0.0, 0.0, 0.3};
        s.sigma = name == "appc-s1" ? identity_covariance(3) : exchangeable_covariance(3, 0.5);
        s.gammas = {1.0, 1.05, 1.1};
        s.methods = {Method::separate, Method::minimax, Method::closed_testing};
        return s;
    }
    throw input_error("unknown preset '" + name + "'");
}

} // namespace sensi
