#pragma once

// Brute-force verification tools: exhaustive binary-confounder search and a
// dense grid over u in [0,1]^N with scan/pattern-search refinement. Everything
// in this header evaluates the rejection functionals through its own code
// path (softmax, moments, thresholds recomputed from scratch) so that
// agreement with the solver is evidence, not circularity.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "sensi/design.hpp"
#include "sensi/error.hpp"
#include "sensi/minimax.hpp"
#include "sensi/stats.hpp"

namespace sensi::oracle {

// Independent evaluation of max_k zeta_tilde at a confounder vector u.
// Deliberately re-derives the probabilities and moments from first principles.
inline double objective_at(const MinimaxProblem& p, const std::vector<double>& u) {
    const double log_gamma = std::log(p.gamma);
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < p.outcome_count(); ++k) {
        const auto& o = p.outcomes[static_cast<std::size_t>(k)];
        double mean = 0.0, variance = 0.0;
        for (int i = 0; i < p.strata(); ++i) {
            const int off = p.offsets[static_cast<std::size_t>(i)];
            const int n = p.sizes[static_cast<std::size_t>(i)];
            double wsum = 0.0;
            for (int j = 0; j < n; ++j)
                wsum += std::exp(log_gamma * u[static_cast<std::size_t>(off + j)]);
            double m1 = 0.0, m2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double w = std::exp(log_gamma * u[static_cast<std::size_t>(off + j)]) / wsum;
                double qv = o.q[static_cast<std::size_t>(off + j)];
                m1 += w * qv;
                m2 += w * qv * qv;
            }
            mean += m1;
            variance += m2 - m1 * m1;
        }
        double centered = o.t_obs - mean;
        double zk;
        if (o.alternative == Alternative::greater && centered < 0.0)
            zk = kOneSidedPenalty;
        else if (o.alternative == Alternative::less && centered > 0.0)
            zk = kOneSidedPenalty;
        else
            zk = centered * centered - o.threshold * variance;
        worst = std::max(worst, zk);
    }
    return worst;
}

struct OracleResult {
    double value = 0.0;
    std::vector<double> u;
    int resolution = 0;
    int refinement_passes = 0;
};

struct WorstCaseBound {
    double gamma = 1.0;
    bool maximize = true;
    double mean = 0.0;
    double variance = 0.0;
    double deviate = 0.0;
    std::vector<std::uint8_t> pattern; // the binary u attaining the extreme
};

// Exhaustive search over binary confounders u in {0,1}^N for the extreme
// expectation of t_k (ties broken toward larger variance), N <= 20.
inline WorstCaseBound enumerate_binary_u(const ScoreMatrix& scores, const MatchedDesign& design,
                                         int k, const GammaValue& gamma, bool maximize,
                                         int n_cap = 20) {
    const int n_total = design.total_individuals();
    if (n_total > n_cap)
        throw cap_error("binary-u enumeration capped at N = " + std::to_string(n_cap));
    const auto& q = scores.columns[static_cast<std::size_t>(k)];
    const auto sizes = design.stratum_sizes();
    const auto offsets = design.member_offsets();

    WorstCaseBound best;
    best.gamma = gamma.value;
    best.maximize = maximize;
    best.mean = maximize ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
    const std::uint64_t limit = 1ull << n_total;
    for (std::uint64_t mask = 0; mask < limit; ++mask) {
        double mean = 0.0, variance = 0.0;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            int off = offsets[i], n = sizes[i];
            double wsum = 0.0, m1 = 0.0, m2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double w = (mask >> (off + j)) & 1u ? gamma.value : 1.0;
                wsum += w;
                m1 += w * q[static_cast<std::size_t>(off + j)];
                m2 += w * q[static_cast<std::size_t>(off + j)] *
                      q[static_cast<std::size_t>(off + j)];
            }
            m1 /= wsum;
            m2 /= wsum;
            mean += m1;
            variance += m2 - m1 * m1;
        }
        bool better = maximize ? mean > best.mean : mean < best.mean;
        bool tie = mean == best.mean && variance > best.variance;
        if (better || tie) {
            best.mean = mean;
            best.variance = variance;
            best.pattern.assign(static_cast<std::size_t>(n_total), 0);
            for (int m = 0; m < n_total; ++m)
                best.pattern[static_cast<std::size_t>(m)] =
                    static_cast<std::uint8_t>((mask >> m) & 1u);
        }
    }
    double t = scores.t_obs[static_cast<std::size_t>(k)];
    best.deviate = best.variance > 0.0 ? (t - best.mean) / std::sqrt(best.variance)
                                       : std::numeric_limits<double>::infinity();
    return best;
}

namespace detail {

// All grid patterns for one stratum: u on {0, 1/(r-1), ..., 1}^n with at
// least one coordinate equal to 0 (adding a constant within a stratum leaves
// the probabilities unchanged).
inline std::vector<std::vector<double>> stratum_patterns(int n, int resolution) {
    std::vector<std::vector<double>> out;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
        if (std::find(idx.begin(), idx.end(), 0) != idx.end()) {
            std::vector<double> u(static_cast<std::size_t>(n));
            for (int j = 0; j < n; ++j)
                u[static_cast<std::size_t>(j)] =
                    static_cast<double>(idx[static_cast<std::size_t>(j)]) / (resolution - 1);
            out.push_back(std::move(u));
        }
        int level = n - 1;
        while (level >= 0 && ++idx[static_cast<std::size_t>(level)] == resolution) {
            idx[static_cast<std::size_t>(level)] = 0;
            --level;
        }
        if (level < 0) break;
    }
    return out;
}

// Per-outcome (sum p*q, sum p*q^2) contribution of one stratum pattern.
struct PatternMoments {
    std::vector<double> m1, m2; // indexed by outcome
};

inline PatternMoments pattern_moments(const MinimaxProblem& p, int stratum,
                                      const std::vector<double>& u_pattern) {
    const int off = p.offsets[static_cast<std::size_t>(stratum)];
    const int n = p.sizes[static_cast<std::size_t>(stratum)];
    const double lg = std::log(p.gamma);
    double wsum = 0.0;
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        w[static_cast<std::size_t>(j)] = std::exp(lg * u_pattern[static_cast<std::size_t>(j)]);
        wsum += w[static_cast<std::size_t>(j)];
    }
    PatternMoments out;
    out.m1.assign(static_cast<std::size_t>(p.outcome_count()), 0.0);
    out.m2.assign(static_cast<std::size_t>(p.outcome_count()), 0.0);
    for (int k = 0; k < p.outcome_count(); ++k) {
        const auto& q = p.outcomes[static_cast<std::size_t>(k)].q;
        for (int j = 0; j < n; ++j) {
            double pj = w[static_cast<std::size_t>(j)] / wsum;
            double qv = q[static_cast<std::size_t>(off + j)];
            out.m1[static_cast<std::size_t>(k)] += pj * qv;
            out.m2[static_cast<std::size_t>(k)] += pj * qv * qv;
        }
    }
    return out;
}

inline double objective_from_totals(const MinimaxProblem& p, const std::vector<double>& mean,
                                    const std::vector<double>& raw2) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < p.outcome_count(); ++k) {
        const auto& o = p.outcomes[static_cast<std::size_t>(k)];
        double variance = raw2[static_cast<std::size_t>(k)];
        double centered = o.t_obs - mean[static_cast<std::size_t>(k)];
        double zk;
        if (o.alternative == Alternative::greater && centered < 0.0)
            zk = kOneSidedPenalty;
        else if (o.alternative == Alternative::less && centered > 0.0)
            zk = kOneSidedPenalty;
        else
            zk = centered * centered - o.threshold * variance;
        worst = std::max(worst, zk);
    }
    return worst;
}

// Full-range scans: every coordinate over a fine 1D grid (and optionally
// every pair over a 2D grid). Scans escape single- and two-coordinate traps
// that a local compass cannot.
inline void scan_refine_1d(const MinimaxProblem& p, std::vector<double>& u, double& value,
                           int resolution = 80, int sweeps = 8) {
    const int n = p.total();
    std::vector<double> trial = u;
    bool improved = true;
    int guard = 0;
    while (improved && guard++ < sweeps) {
        improved = false;
        for (int a = 0; a < n; ++a) {
            trial = u;
            for (int g = 0; g <= resolution; ++g) {
                trial[static_cast<std::size_t>(a)] = static_cast<double>(g) / resolution;
                double v = objective_at(p, trial);
                if (v < value - 1e-15 * std::max(1.0, std::fabs(value))) {
                    value = v;
                    u = trial;
                    improved = true;
                }
                trial[static_cast<std::size_t>(a)] = u[static_cast<std::size_t>(a)];
            }
        }
    }
}

inline void scan_refine_2d(const MinimaxProblem& p, std::vector<double>& u, double& value,
                           int resolution = 20) {
    const int n = p.total();
    std::vector<double> trial = u;
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            trial = u;
            double best_a = u[static_cast<std::size_t>(a)];
            double best_b = u[static_cast<std::size_t>(b)];
            bool moved = false;
            for (int ga = 0; ga <= resolution; ++ga) {
                trial[static_cast<std::size_t>(a)] = static_cast<double>(ga) / resolution;
                for (int gb = 0; gb <= resolution; ++gb) {
                    trial[static_cast<std::size_t>(b)] = static_cast<double>(gb) / resolution;
                    double v = objective_at(p, trial);
                    if (v < value - 1e-15 * std::max(1.0, std::fabs(value))) {
                        value = v;
                        best_a = trial[static_cast<std::size_t>(a)];
                        best_b = trial[static_cast<std::size_t>(b)];
                        moved = true;
                    }
                }
            }
            if (moved) {
                u[static_cast<std::size_t>(a)] = best_a;
                u[static_cast<std::size_t>(b)] = best_b;
            }
        }
    }
}

// Nelder-Mead over u in [0,1]^N (values clamped), restarted with shrinking
// initial simplex radii; the adapting simplex follows ridge directions that
// axis-aligned moves cannot.
inline void nelder_mead_refine(const MinimaxProblem& p, std::vector<double>& u, double& value) {
    const int n = p.total();
    auto eval = [&](std::vector<double> x) {
        for (auto& v : x) v = std::clamp(v, 0.0, 1.0);
        return objective_at(p, x);
    };
    for (double radius : {0.2, 0.05, 0.01, 0.002, 5e-4}) {
        std::vector<std::vector<double>> simplex{u};
        std::vector<double> values{value};
        for (int j = 0; j < n; ++j) {
            std::vector<double> x = u;
            x[static_cast<std::size_t>(j)] +=
                x[static_cast<std::size_t>(j)] + radius <= 1.0 ? radius : -radius;
            simplex.push_back(x);
            values.push_back(eval(x));
        }
        for (int it = 0; it < 400 * n; ++it) {
            // order
            std::vector<int> ord(simplex.size());
            for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = static_cast<int>(i);
            std::sort(ord.begin(), ord.end(),
                      [&](int a, int b) { return values[static_cast<std::size_t>(a)] <
                                                 values[static_cast<std::size_t>(b)]; });
            int best = ord.front(), worst = ord.back(), second = ord[ord.size() - 2];
            if (values[static_cast<std::size_t>(worst)] -
                    values[static_cast<std::size_t>(best)] <
                1e-13 * std::max(1.0, std::fabs(values[static_cast<std::size_t>(best)])))
                break;
            std::vector<double> centroid(static_cast<std::size_t>(n), 0.0);
            for (int i : ord)
                if (i != worst)
                    for (int j = 0; j < n; ++j)
                        centroid[static_cast<std::size_t>(j)] +=
                            simplex[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / n;
            auto blend = [&](double coef) {
                std::vector<double> x(static_cast<std::size_t>(n));
                for (int j = 0; j < n; ++j)
                    x[static_cast<std::size_t>(j)] =
                        centroid[static_cast<std::size_t>(j)] +
                        coef * (simplex[static_cast<std::size_t>(worst)]
                                       [static_cast<std::size_t>(j)] -
                                centroid[static_cast<std::size_t>(j)]);
                for (auto& v : x) v = std::clamp(v, 0.0, 1.0);
                return x;
            };
            std::vector<double> reflected = blend(-1.0);
            double fr = eval(reflected);
            if (fr < values[static_cast<std::size_t>(best)]) {
                std::vector<double> expanded = blend(-2.0);
                double fe = eval(expanded);
                if (fe < fr) {
                    simplex[static_cast<std::size_t>(worst)] = expanded;
                    values[static_cast<std::size_t>(worst)] = fe;
                } else {
                    simplex[static_cast<std::size_t>(worst)] = reflected;
                    values[static_cast<std::size_t>(worst)] = fr;
                }
            } else if (fr < values[static_cast<std::size_t>(second)]) {
                simplex[static_cast<std::size_t>(worst)] = reflected;
                values[static_cast<std::size_t>(worst)] = fr;
            } else {
                std::vector<double> contracted = blend(0.5);
                double fc = eval(contracted);
                if (fc < values[static_cast<std::size_t>(worst)]) {
                    simplex[static_cast<std::size_t>(worst)] = contracted;
                    values[static_cast<std::size_t>(worst)] = fc;
                } else {
                    for (std::size_t i = 0; i < simplex.size(); ++i) {
                        if (static_cast<int>(i) == best) continue;
                        for (int j = 0; j < n; ++j)
                            simplex[i][static_cast<std::size_t>(j)] =
                                0.5 * (simplex[i][static_cast<std::size_t>(j)] +
                                       simplex[static_cast<std::size_t>(best)]
                                              [static_cast<std::size_t>(j)]);
                        values[i] = eval(simplex[i]);
                    }
                }
            }
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < values.size(); ++i)
            if (values[i] < values[best]) best = i;
        if (values[best] < value) {
            value = values[best];
            u = simplex[best];
            for (auto& v : u) v = std::clamp(v, 0.0, 1.0);
        }
    }
}

// Shrinking compass search over u in [0,1]^N, including two-coordinate moves
// so ridges where two outcomes tie can be descended.
inline void pattern_refine(const MinimaxProblem& p, std::vector<double>& u, double& value,
                           double final_step) {
    const int n = p.total();
    std::vector<double> trial;
    for (double step = 0.05; step >= final_step; step *= 0.5) {
        bool improved = true;
        int guard = 0;
        while (improved && guard++ < 80) {
            improved = false;
            for (int a = 0; a < n; ++a) {
                for (double sa : {step, -step}) {
                    trial = u;
                    trial[static_cast<std::size_t>(a)] =
                        std::clamp(trial[static_cast<std::size_t>(a)] + sa, 0.0, 1.0);
                    double v = objective_at(p, trial);
                    if (v < value - 0.0) {
                        value = v;
                        u = trial;
                        improved = true;
                        continue;
                    }
                    for (int b = a + 1; b < n; ++b) {
                        for (double sb : {step, -step}) {
                            std::vector<double> trial2 = trial;
                            trial2[static_cast<std::size_t>(b)] =
                                std::clamp(trial2[static_cast<std::size_t>(b)] + sb, 0.0, 1.0);
                            double v2 = objective_at(p, trial2);
                            if (v2 < value - 0.0) {
                                value = v2;
                                u = trial2;
                                improved = true;
                                break;
                            }
                        }
                        if (improved) break;
                    }
                }
            }
        }
    }
}

} // namespace detail

// Dense per-stratum grid over confounder patterns with cached contributions,
// coordinate descent across strata from several deterministic starts, then
// full-range 1D/2D scans and a shrinking pattern search down to step 1e-5.
// The value is an upper bound on the true minimum.
inline OracleResult grid_minimax(const MinimaxProblem& p, int resolution = 21,
                                 int refine_passes = 3, int n_cap = 8, int k_cap = 3) {
    if (p.total() > n_cap)
        throw cap_error("grid oracle capped at N = " + std::to_string(n_cap));
    if (p.outcome_count() > k_cap)
        throw cap_error("grid oracle capped at K = " + std::to_string(k_cap));

    const int strata = p.strata();
    const int kc = p.outcome_count();
    std::vector<std::vector<std::vector<double>>> patterns;
    std::vector<std::vector<detail::PatternMoments>> moments;
    patterns.reserve(static_cast<std::size_t>(strata));
    moments.reserve(static_cast<std::size_t>(strata));
    for (int i = 0; i < strata; ++i) {
        patterns.push_back(
            detail::stratum_patterns(p.sizes[static_cast<std::size_t>(i)], resolution));
        std::vector<detail::PatternMoments> m;
        m.reserve(patterns.back().size());
        for (const auto& pat : patterns.back()) m.push_back(detail::pattern_moments(p, i, pat));
        moments.push_back(std::move(m));
    }

    auto assemble = [&](const std::vector<int>& choice) {
        std::vector<double> u(static_cast<std::size_t>(p.total()), 0.0);
        for (int i = 0; i < strata; ++i) {
            const auto& pat =
                patterns[static_cast<std::size_t>(i)]
                        [static_cast<std::size_t>(choice[static_cast<std::size_t>(i)])];
            std::copy(pat.begin(), pat.end(), u.begin() + p.offsets[static_cast<std::size_t>(i)]);
        }
        return u;
    };

    // starting pattern choices: all-zero plus, per outcome and direction, the
    // per-stratum grid pattern extremizing that outcome's mean contribution
    std::vector<std::vector<int>> inits;
    inits.emplace_back(static_cast<std::size_t>(strata), 0);
    for (int k = 0; k < kc; ++k) {
        for (bool maximize : {true, false}) {
            std::vector<int> choice(static_cast<std::size_t>(strata), 0);
            for (int i = 0; i < strata; ++i) {
                const auto& ms = moments[static_cast<std::size_t>(i)];
                int best = 0;
                for (std::size_t c = 1; c < ms.size(); ++c) {
                    double dm = ms[c].m1[static_cast<std::size_t>(k)] -
                                ms[static_cast<std::size_t>(best)].m1[static_cast<std::size_t>(k)];
                    if (maximize ? dm > 0.0 : dm < 0.0) best = static_cast<int>(c);
                }
                choice[static_cast<std::size_t>(i)] = best;
            }
            inits.push_back(std::move(choice));
        }
    }

    OracleResult best;
    best.resolution = resolution;
    best.refinement_passes = refine_passes;
    best.value = std::numeric_limits<double>::infinity();

    struct Basin {
        std::vector<int> choice;
        double value = 0.0;
    };
    std::vector<Basin> basins;

    std::vector<double> mean(static_cast<std::size_t>(kc)), raw2(static_cast<std::size_t>(kc));
    for (const auto& init : inits) {
        std::vector<int> choice = init;
        // totals for the current choice
        auto totals = [&]() {
            std::fill(mean.begin(), mean.end(), 0.0);
            std::fill(raw2.begin(), raw2.end(), 0.0);
            for (int i = 0; i < strata; ++i) {
                const auto& m = moments[static_cast<std::size_t>(i)]
                                       [static_cast<std::size_t>(choice[static_cast<std::size_t>(i)])];
                for (int k = 0; k < kc; ++k) {
                    mean[static_cast<std::size_t>(k)] += m.m1[static_cast<std::size_t>(k)];
                    raw2[static_cast<std::size_t>(k)] +=
                        m.m2[static_cast<std::size_t>(k)] -
                        m.m1[static_cast<std::size_t>(k)] * m.m1[static_cast<std::size_t>(k)];
                }
            }
        };
        totals();
        double value = detail::objective_from_totals(p, mean, raw2);
        bool moved = true;
        int guard = 0;
        while (moved && guard++ < 60) {
            moved = false;
            for (int i = 0; i < strata; ++i) {
                const auto& ms = moments[static_cast<std::size_t>(i)];
                const auto& cur =
                    ms[static_cast<std::size_t>(choice[static_cast<std::size_t>(i)])];
                // totals minus this stratum
                std::vector<double> mean_rest(mean), raw_rest(raw2);
                for (int k = 0; k < kc; ++k) {
                    mean_rest[static_cast<std::size_t>(k)] -= cur.m1[static_cast<std::size_t>(k)];
                    raw_rest[static_cast<std::size_t>(k)] -=
                        cur.m2[static_cast<std::size_t>(k)] -
                        cur.m1[static_cast<std::size_t>(k)] * cur.m1[static_cast<std::size_t>(k)];
                }
                int best_c = choice[static_cast<std::size_t>(i)];
                double best_v = value;
                std::vector<double> mtry(static_cast<std::size_t>(kc)),
                    rtry(static_cast<std::size_t>(kc));
                for (std::size_t c = 0; c < ms.size(); ++c) {
                    for (int k = 0; k < kc; ++k) {
                        mtry[static_cast<std::size_t>(k)] =
                            mean_rest[static_cast<std::size_t>(k)] +
                            ms[c].m1[static_cast<std::size_t>(k)];
                        rtry[static_cast<std::size_t>(k)] =
                            raw_rest[static_cast<std::size_t>(k)] +
                            ms[c].m2[static_cast<std::size_t>(k)] -
                            ms[c].m1[static_cast<std::size_t>(k)] *
                                ms[c].m1[static_cast<std::size_t>(k)];
                    }
                    double v = detail::objective_from_totals(p, mtry, rtry);
                    if (v < best_v - 0.0) {
                        best_v = v;
                        best_c = static_cast<int>(c);
                    }
                }
                if (best_c != choice[static_cast<std::size_t>(i)]) {
                    choice[static_cast<std::size_t>(i)] = best_c;
                    totals();
                    value = best_v;
                    moved = true;
                }
            }
        }
        basins.push_back({choice, value});
    }

    // refine the most promising coordinate-descent basins
    std::stable_sort(basins.begin(), basins.end(),
                     [](const Basin& a, const Basin& b) { return a.value < b.value; });
    const std::size_t keep = std::min<std::size_t>(basins.size(), 3);
    for (std::size_t b = 0; b < keep; ++b) {
        std::vector<double> u = assemble(basins[b].choice);
        double value_u = objective_at(p, u);
        detail::scan_refine_1d(p, u, value_u);
        detail::scan_refine_2d(p, u, value_u);
        for (int pass = 0; pass < refine_passes; ++pass) {
            detail::nelder_mead_refine(p, u, value_u);
            detail::pattern_refine(p, u, value_u, 1e-5);
        }
        if (value_u < best.value) {
            best.value = value_u;
            best.u = u;
        }
    }
    return best;
}

} // namespace sensi::oracle
