#pragma once

// Worst-case sensitivity analysis across several outcomes at once: minimize
// over feasible assignment probabilities the maximum rejection functional
//
//   zeta_k(rho) = (t_k - E[t_k; rho])^2 - threshold_k * Var(t_k; rho),
//
// where rho ranges over per-stratum probability vectors whose entries may
// differ by at most a factor Gamma (the image of the confounder model
// rho_ij = exp(gamma * u_ij) / sum_j' exp(gamma * u_ij'), u in [0,1]^N).
// Rejection of the intersection null at this Gamma holds iff the optimum
// y* = min max_k zeta_k is >= 0: no single confounder vector can explain
// every outcome away.
//
// One-sided alternatives replace the big-M device with an exact piecewise
// functional: when the statistic falls on the wrong side of its mean the
// outcome can never register a rejection, encoded by a finite sentinel.
//
// Solver: multi-start projected first-order descent on a log-sum-exp
// smoothing of the max with a decreasing temperature schedule, followed by
// exact per-stratum polishing (closed form for pairs) and a small pattern
// search. Every iterate stays feasible via Euclidean projection onto the
// per-stratum polytope {simplex, max <= Gamma * min}.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sensi/design.hpp"
#include "sensi/error.hpp"
#include "sensi/normal.hpp"
#include "sensi/randomization.hpp"
#include "sensi/rng.hpp"
#include "sensi/stats.hpp"
#include "sensi/threads.hpp"

namespace sensi {

// Finite stand-in for "this one-sided outcome cannot reject here"; compares
// below every attainable zeta and is never NaN.
inline constexpr double kOneSidedPenalty = -1e30;

struct OutcomeProblem {
    std::vector<double> q; // N scores in design member order
    double t_obs = 0.0;
    Alternative alternative = Alternative::two_sided;
    double threshold = 0.0; // chi-square(1) quantile paired with the local level
    int source_index = 0;   // outcome index in the originating score matrix
};

struct MinimaxProblem {
    std::vector<int> sizes;   // stratum sizes
    std::vector<int> offsets; // size I+1, prefix sums of sizes
    double gamma = 1.0;
    std::vector<OutcomeProblem> outcomes;

    int strata() const { return static_cast<int>(sizes.size()); }
    int total() const { return offsets.back(); }
    int outcome_count() const { return static_cast<int>(outcomes.size()); }
};

struct AssignmentProbabilities {
    std::vector<double> rho; // length N, per-stratum blocks summing to 1
    std::vector<double> s;   // per-stratum Charnes-Cooper scale, s_i = min_j rho_ij
    double gamma = 1.0;
};

// Local per-outcome levels: alpha/m for two-sided outcomes and 2*alpha/m
// inside the one-sided functional, m = |subset|.
inline double outcome_threshold(Alternative alt, double alpha, int subset_size) {
    double local = alpha / static_cast<double>(subset_size);
    double p = alt == Alternative::two_sided ? 1.0 - local : 1.0 - 2.0 * local;
    return chi_square_1_quantile(std::max(0.0, p));
}

inline MinimaxProblem make_minimax_problem(const ScoreMatrix& scores,
                                           const MatchedDesign& design,
                                           const std::vector<int>& subset,
                                           const GammaValue& gamma, double alpha,
                                           const std::vector<Alternative>& alternatives) {
    if (subset.empty()) throw input_error("empty outcome subset");
    if (!(alpha > 0.0 && alpha < 1.0)) throw input_error("alpha must be in (0, 1)");
    MinimaxProblem p;
    p.sizes = design.stratum_sizes();
    const auto off = design.member_offsets();
    p.offsets.assign(off.begin(), off.end());
    p.gamma = gamma.value;
    const int m = static_cast<int>(subset.size());
    for (int k : subset) {
        if (k < 0 || k >= scores.outcome_count()) throw input_error("outcome index out of range");
        OutcomeProblem o;
        o.q = scores.columns[static_cast<std::size_t>(k)];
        o.t_obs = scores.t_obs[static_cast<std::size_t>(k)];
        o.alternative = alternatives.empty() ? Alternative::two_sided
                                             : alternatives[static_cast<std::size_t>(k)];
        o.threshold = outcome_threshold(o.alternative, alpha, m);
        o.source_index = k;
        p.outcomes.push_back(std::move(o));
    }
    return p;
}

// ---------------------------------------------------------------------------
// Confounder model geometry
// ---------------------------------------------------------------------------

inline std::vector<double> uniform_rho(const std::vector<int>& sizes) {
    std::vector<double> rho;
    for (int n : sizes)
        for (int j = 0; j < n; ++j) rho.push_back(1.0 / n);
    return rho;
}

// Softmax with logits log(Gamma) * u over one stratum.
inline std::vector<double> implied_probabilities(const std::vector<double>& u, double gamma) {
    double lg = std::log(gamma);
    double umax = *std::max_element(u.begin(), u.end());
    std::vector<double> p(u.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        p[j] = std::exp(lg * (u[j] - umax));
        sum += p[j];
    }
    for (auto& v : p) v /= sum;
    return p;
}

inline std::vector<double> rho_from_confounder(const std::vector<double>& u, double gamma,
                                               const std::vector<int>& sizes) {
    std::vector<double> rho(u.size());
    double lg = std::log(gamma);
    std::size_t off = 0;
    for (int n : sizes) {
        double umax = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) umax = std::max(umax, u[off + j]);
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            rho[off + j] = std::exp(lg * (u[off + j] - umax));
            sum += rho[off + j];
        }
        for (int j = 0; j < n; ++j) rho[off + j] /= sum;
        off += static_cast<std::size_t>(n);
    }
    return rho;
}

// Recover u in [0,1]^N with rho = softmax(log(Gamma) * u); the member with the
// smallest probability gets u = 0.
inline std::vector<double> confounder_from_rho(const std::vector<double>& rho, double gamma,
                                               const std::vector<int>& sizes) {
    std::vector<double> u(rho.size(), 0.0);
    if (gamma <= 1.0) return u;
    double lg = std::log(gamma);
    std::size_t off = 0;
    for (int n : sizes) {
        double rmin = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) rmin = std::min(rmin, rho[off + j]);
        for (int j = 0; j < n; ++j)
            u[off + j] = std::clamp(std::log(rho[off + j] / rmin) / lg, 0.0, 1.0);
        off += static_cast<std::size_t>(n);
    }
    return u;
}

inline std::vector<double> stratum_scales(const std::vector<double>& rho,
                                          const std::vector<int>& sizes) {
    std::vector<double> s;
    s.reserve(sizes.size());
    std::size_t off = 0;
    for (int n : sizes) {
        double rmin = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) rmin = std::min(rmin, rho[off + j]);
        s.push_back(rmin);
        off += static_cast<std::size_t>(n);
    }
    return s;
}

// Worst feasibility violation over strata: max(|sum - 1|, relative ratio excess).
inline double feasibility_violation(const std::vector<double>& rho,
                                    const std::vector<int>& sizes, double gamma) {
    double worst = 0.0;
    std::size_t off = 0;
    for (int n : sizes) {
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (int j = 0; j < n; ++j) {
            double v = rho[off + j];
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        worst = std::max(worst, std::fabs(sum - 1.0));
        if (lo <= 0.0)
            worst = std::max(worst, lo < 0.0 ? std::fabs(lo) : (hi > gamma * lo ? 1.0 : 0.0));
        else
            worst = std::max(worst, std::max(0.0, hi / (gamma * lo) - 1.0));
        off += static_cast<std::size_t>(n);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Projection onto {x : sum x = 1, x >= 0, max x <= Gamma * min x}
// ---------------------------------------------------------------------------

namespace detail {

// Project v onto {sum = 1, s <= x_j <= Gamma*s} by bisecting the shift lambda
// in x_j = clip(v_j - lambda, s, Gamma*s).
inline void box_simplex_project(const double* v, int n, double s, double gamma, double* out) {
    double lo_bound = s, hi_bound = gamma * s;
    double vmin = v[0], vmax = v[0];
    for (int j = 1; j < n; ++j) {
        vmin = std::min(vmin, v[j]);
        vmax = std::max(vmax, v[j]);
    }
    double lam_lo = vmin - hi_bound; // all entries at the upper bound
    double lam_hi = vmax - lo_bound; // all entries at the lower bound
    for (int it = 0; it < 90; ++it) {
        double lam = 0.5 * (lam_lo + lam_hi);
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += std::clamp(v[j] - lam, lo_bound, hi_bound);
        (sum > 1.0 ? lam_lo : lam_hi) = lam;
    }
    double lam = 0.5 * (lam_lo + lam_hi);
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        out[j] = std::clamp(v[j] - lam, lo_bound, hi_bound);
        sum += out[j];
    }
    for (int j = 0; j < n; ++j) out[j] /= sum;
}

inline double sq_dist(const double* a, const double* b, int n) {
    double d = 0.0;
    for (int j = 0; j < n; ++j) d += (a[j] - b[j]) * (a[j] - b[j]);
    return d;
}

} // namespace detail

namespace detail {

// Exact projection by enumerating KKT active patterns: each coordinate sits
// at the lower bound s, the upper bound Gamma*s, or is free (x_j = v_j -
// lambda). For a fixed pattern the stationarity conditions reduce to a 2x2
// linear system in (s, lambda); the feasible pattern with the smallest
// distance wins. 3^n patterns, used for small strata.
inline bool project_by_patterns(const double* v, int n, double gamma, double* out) {
    const int patterns = [&] {
        int p = 1;
        for (int j = 0; j < n; ++j) p *= 3;
        return p;
    }();
    double best_dist = std::numeric_limits<double>::infinity();
    double best_x[8];
    double x[8];
    for (int code = 0; code < patterns; ++code) {
        int c = code;
        int role[8]; // 0 = lower, 1 = upper, 2 = free
        int n_low = 0, n_up = 0, n_free = 0;
        double sum_low = 0.0, sum_up = 0.0, sum_free = 0.0;
        for (int j = 0; j < n; ++j) {
            role[j] = c % 3;
            c /= 3;
            if (role[j] == 0) {
                ++n_low;
                sum_low += v[j];
            } else if (role[j] == 1) {
                ++n_up;
                sum_up += v[j];
            } else {
                ++n_free;
                sum_free += v[j];
            }
        }
        double s, lambda;
        if (n_low + n_up == 0) {
            // plain affine projection onto the sum constraint
            lambda = (sum_free - 1.0) / n;
            s = 0.0;
            double xmin = std::numeric_limits<double>::infinity(), xmax = 0.0;
            for (int j = 0; j < n; ++j) {
                x[j] = v[j] - lambda;
                xmin = std::min(xmin, x[j]);
                xmax = std::max(xmax, x[j]);
            }
            if (!(xmin > 0.0) || xmax > gamma * xmin * (1.0 + 1e-12)) continue;
        } else {
            double a_coef = n_low + gamma * gamma * n_up;
            double b_coef = sum_low + gamma * sum_up;
            double c_coef = n_low + gamma * n_up;
            if (n_free == 0) {
                s = 1.0 / c_coef;
                lambda = (b_coef - s * a_coef) / c_coef; // from s-stationarity
            } else {
                double mu = (c_coef * b_coef + a_coef * (sum_free - 1.0)) /
                            (c_coef * c_coef + a_coef * n_free);
                s = (b_coef - mu * c_coef) / a_coef;
                lambda = mu;
            }
            if (!(s > 0.0)) continue;
            bool ok = true;
            const double tol = 1e-12;
            for (int j = 0; j < n && ok; ++j) {
                if (role[j] == 0) {
                    x[j] = s;
                    if (v[j] - lambda > s + tol) ok = false; // multiplier sign
                } else if (role[j] == 1) {
                    x[j] = gamma * s;
                    if (v[j] - lambda < gamma * s - tol) ok = false;
                } else {
                    x[j] = v[j] - lambda;
                    if (x[j] < s - tol || x[j] > gamma * s + tol) ok = false;
                }
            }
            if (!ok) continue;
        }
        double dist = 0.0;
        for (int j = 0; j < n; ++j) dist += (x[j] - v[j]) * (x[j] - v[j]);
        if (dist < best_dist) {
            best_dist = dist;
            std::copy(x, x + n, best_x);
        }
    }
    if (best_dist == std::numeric_limits<double>::infinity()) return false;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) sum += best_x[j];
    for (int j = 0; j < n; ++j) out[j] = best_x[j] / sum;
    return true;
}

} // namespace detail

// Euclidean projection of one stratum block onto the feasible set. Small
// strata get the exact active-pattern enumeration; larger ones eliminate the
// scale via s = min_j x_j (the squared distance is convex in s) and run a
// golden-section search over s with the clipped-shift bisection inside.
inline void project_onto_stratum(const double* v, int n, double gamma, double* out) {
    if (gamma <= 1.0) {
        for (int j = 0; j < n; ++j) out[j] = 1.0 / n;
        return;
    }
    if (n == 2) {
        double lo = 1.0 / (1.0 + gamma), hi = gamma / (1.0 + gamma);
        double p = std::clamp(0.5 * (v[0] - v[1] + 1.0), lo, hi);
        out[0] = p;
        out[1] = 1.0 - p;
        return;
    }
    if (n <= 8 && detail::project_by_patterns(v, n, gamma, out)) return;
    double s_lo = 1.0 / (n * gamma), s_hi = 1.0 / n;
    std::vector<double> xa(static_cast<std::size_t>(n)), xb(static_cast<std::size_t>(n));
    const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = s_lo, b = s_hi;
    double m1 = b - invphi * (b - a), m2 = a + invphi * (b - a);
    detail::box_simplex_project(v, n, m1, gamma, xa.data());
    detail::box_simplex_project(v, n, m2, gamma, xb.data());
    double f1 = detail::sq_dist(xa.data(), v, n), f2 = detail::sq_dist(xb.data(), v, n);
    for (int it = 0; it < 70; ++it) {
        if (f1 <= f2) {
            b = m2;
            m2 = m1;
            f2 = f1;
            m1 = b - invphi * (b - a);
            detail::box_simplex_project(v, n, m1, gamma, xa.data());
            f1 = detail::sq_dist(xa.data(), v, n);
        } else {
            a = m1;
            m1 = m2;
            f1 = f2;
            m2 = a + invphi * (b - a);
            detail::box_simplex_project(v, n, m2, gamma, xb.data());
            f2 = detail::sq_dist(xb.data(), v, n);
        }
    }
    detail::box_simplex_project(v, n, 0.5 * (a + b), gamma, out);
}

inline void project_feasible(std::vector<double>& rho, const MinimaxProblem& p) {
    std::vector<double> buf;
    for (int i = 0; i < p.strata(); ++i) {
        int n = p.sizes[static_cast<std::size_t>(i)];
        int off = p.offsets[static_cast<std::size_t>(i)];
        buf.assign(rho.begin() + off, rho.begin() + off + n);
        project_onto_stratum(buf.data(), n, p.gamma, rho.data() + off);
    }
}

// ---------------------------------------------------------------------------
// Rejection functionals
// ---------------------------------------------------------------------------

inline MomentPair problem_moments(const MinimaxProblem& p, int k, const std::vector<double>& rho) {
    const auto& q = p.outcomes[static_cast<std::size_t>(k)].q;
    MomentPair total;
    for (int i = 0; i < p.strata(); ++i) {
        int off = p.offsets[static_cast<std::size_t>(i)];
        MomentPair m = stratum_moments(q.data() + off, rho.data() + off,
                                       p.sizes[static_cast<std::size_t>(i)]);
        total.mean += m.mean;
        total.variance += m.variance;
    }
    return total;
}

// (t_k - mean)^2 - threshold_k * variance at the given assignment probabilities.
inline double zeta(const MinimaxProblem& p, int k, const std::vector<double>& rho) {
    const auto& o = p.outcomes[static_cast<std::size_t>(k)];
    MomentPair m = problem_moments(p, k, rho);
    double centered = o.t_obs - m.mean;
    return centered * centered - o.threshold * m.variance;
}

// One-sided functional: if the statistic lies on the wrong side of its mean
// the outcome cannot register a rejection at this rho (sentinel); the boundary
// t == mean counts as satisfying the alternative's direction.
inline double zeta_one_sided(const MinimaxProblem& p, int k, const std::vector<double>& rho) {
    const auto& o = p.outcomes[static_cast<std::size_t>(k)];
    MomentPair m = problem_moments(p, k, rho);
    double centered = o.t_obs - m.mean;
    if (o.alternative == Alternative::greater && centered < 0.0) return kOneSidedPenalty;
    if (o.alternative == Alternative::less && centered > 0.0) return kOneSidedPenalty;
    return centered * centered - o.threshold * m.variance;
}

inline double zeta_tilde(const MinimaxProblem& p, int k, const std::vector<double>& rho) {
    return p.outcomes[static_cast<std::size_t>(k)].alternative == Alternative::two_sided
               ? zeta(p, k, rho)
               : zeta_one_sided(p, k, rho);
}

inline double minimax_objective(const MinimaxProblem& p, const std::vector<double>& rho) {
    double y = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < p.outcome_count(); ++k) y = std::max(y, zeta_tilde(p, k, rho));
    return y;
}

// ---------------------------------------------------------------------------
// Solver
// ---------------------------------------------------------------------------

struct SolverConfig {
    int random_starts = 16;
    std::uint64_t seed = 987654321;
    bool separable_starts = true;
    // confounder vectors (u-space) added as extra starts, e.g. warm starts
    // carried between Gamma evaluations of a changepoint search
    std::vector<std::vector<double>> warm_start_confounders;
    std::vector<double> temperature_schedule = {1e-1, 1e-3, 1e-5, 1e-7}; // x objective scale
    int iterations_per_temperature = 2000;
    long iteration_cap = 100000; // per start
    double improvement_tol = 1e-9;
    int stall_window = 50;
    int polish_passes = 80;
    int pattern_search_max_total = 64; // joint pattern polish allowed up to this N
    bool final_sharpening = true;      // low-temperature re-descent from the incumbent
    int threads = 1;
    std::function<void(const std::vector<double>&)> iterate_hook; // test observability
};

struct MinimaxSolution {
    double y = 0.0;
    AssignmentProbabilities assignment;
    std::vector<double> u;           // confounder recovered from rho
    std::vector<double> zeta_values; // per problem outcome, alternative-aware
    bool reject = false;             // y >= 0
    enum class Certificate { multistart_only, certified_by_grid } certificate =
        Certificate::multistart_only;
    double certified_gap = std::numeric_limits<double>::quiet_NaN();
    bool converged = true;
    int starts = 0;
    long iterations = 0;
    std::string message;
};

namespace detail {

struct Evaluator {
    const MinimaxProblem& p;
    // per-outcome totals reused across evaluations of one iterate
    std::vector<double> mean, var;
    std::vector<double> zbuf, wbuf;

    explicit Evaluator(const MinimaxProblem& prob)
        : p(prob), mean(static_cast<std::size_t>(prob.outcome_count())),
          var(static_cast<std::size_t>(prob.outcome_count())),
          zbuf(static_cast<std::size_t>(prob.outcome_count())),
          wbuf(static_cast<std::size_t>(prob.outcome_count())) {}

    void refresh(const std::vector<double>& rho) {
        for (int k = 0; k < p.outcome_count(); ++k) {
            MomentPair m = problem_moments(p, k, rho);
            mean[static_cast<std::size_t>(k)] = m.mean;
            var[static_cast<std::size_t>(k)] = m.variance;
        }
    }

    double zeta_k(int k) const {
        const auto& o = p.outcomes[static_cast<std::size_t>(k)];
        double centered = o.t_obs - mean[static_cast<std::size_t>(k)];
        if (o.alternative == Alternative::greater && centered < 0.0) return kOneSidedPenalty;
        if (o.alternative == Alternative::less && centered > 0.0) return kOneSidedPenalty;
        return centered * centered - o.threshold * var[static_cast<std::size_t>(k)];
    }

    double objective() const {
        double y = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < p.outcome_count(); ++k) y = std::max(y, zeta_k(k));
        return y;
    }

    // Smoothed objective and its gradient; returns the smoothed value.
    double smoothed(const std::vector<double>& rho, double temperature,
                    std::vector<double>* grad) {
        refresh(rho);
        const int kc = p.outcome_count();
        double m = -std::numeric_limits<double>::infinity();
        auto& z = zbuf;
        auto& w = wbuf;
        for (int k = 0; k < kc; ++k) {
            z[static_cast<std::size_t>(k)] = zeta_k(k);
            m = std::max(m, z[static_cast<std::size_t>(k)]);
        }
        if (grad) std::fill(grad->begin(), grad->end(), 0.0);
        if (m <= kOneSidedPenalty) return m; // nothing can reject anywhere near here
        double wsum = 0.0;
        for (int k = 0; k < kc; ++k) {
            w[static_cast<std::size_t>(k)] = 0.0;
            if (z[static_cast<std::size_t>(k)] <= kOneSidedPenalty) continue;
            w[static_cast<std::size_t>(k)] =
                std::exp((z[static_cast<std::size_t>(k)] - m) / temperature);
            wsum += w[static_cast<std::size_t>(k)];
        }
        double value = m + temperature * std::log(wsum);
        if (grad) {
            for (int k = 0; k < kc; ++k) {
                double wk = w[static_cast<std::size_t>(k)] / wsum;
                if (wk == 0.0) continue;
                const auto& o = p.outcomes[static_cast<std::size_t>(k)];
                double centered = o.t_obs - mean[static_cast<std::size_t>(k)];
                for (int i = 0; i < p.strata(); ++i) {
                    int off = p.offsets[static_cast<std::size_t>(i)];
                    int n = p.sizes[static_cast<std::size_t>(i)];
                    double a = 0.0;
                    for (int j = 0; j < n; ++j)
                        a += rho[static_cast<std::size_t>(off + j)] *
                             o.q[static_cast<std::size_t>(off + j)];
                    for (int j = 0; j < n; ++j) {
                        double qv = o.q[static_cast<std::size_t>(off + j)];
                        (*grad)[static_cast<std::size_t>(off + j)] +=
                            wk * (-2.0 * centered * qv - o.threshold * (qv * qv - 2.0 * a * qv));
                    }
                }
            }
        }
        return value;
    }
};

// Binary confounder pattern extremizing the stratum mean: put weight Gamma on
// the top-c (or bottom-c) scores, scanning every cut.
inline void extreme_mean_pattern(const double* q, int n, double gamma, bool maximize,
                                 double* rho_out) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return maximize ? q[a] > q[b] : q[a] < q[b];
    });
    double best_mean = maximize ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::infinity();
    int best_c = 0; // c = 0 is the uniform pattern
    for (int c = 0; c <= n - 1; ++c) {
        double wsum = 0.0, msum = 0.0;
        for (int j = 0; j < n; ++j) {
            double w = (c > 0 && j < c) ? gamma : 1.0;
            wsum += w;
            msum += w * q[idx[static_cast<std::size_t>(j)]];
        }
        double mean = msum / wsum;
        if ((maximize && mean > best_mean) || (!maximize && mean < best_mean)) {
            best_mean = mean;
            best_c = c;
        }
    }
    double wsum = best_c * gamma + (n - best_c);
    for (int j = 0; j < n; ++j) rho_out[idx[static_cast<std::size_t>(j)]] =
        (j < best_c ? gamma : 1.0) / wsum;
}

struct StartResult {
    double y = std::numeric_limits<double>::infinity();
    std::vector<double> rho;
    bool converged = true;
    long iterations = 0;
};

// Exact minimization over one pair block of max_k of piecewise quadratics in
// p = rho_{i1}: candidates are box ends, vertices, pairwise crossings and
// one-sided direction boundaries.
inline bool polish_pair_block(const MinimaxProblem& p, int stratum, std::vector<double>& rho,
                              std::vector<double>& mean_tot, std::vector<double>& var_tot,
                              double* objective_out) {
    const int off = p.offsets[static_cast<std::size_t>(stratum)];
    const int kc = p.outcome_count();
    const double lo = 1.0 / (1.0 + p.gamma), hi = p.gamma / (1.0 + p.gamma);
    double p_now = rho[static_cast<std::size_t>(off)];

    // residual totals with this block removed
    thread_local std::vector<double> r, vrem, qa, qb;
    r.assign(static_cast<std::size_t>(kc), 0.0);
    vrem.assign(static_cast<std::size_t>(kc), 0.0);
    qa.assign(static_cast<std::size_t>(kc), 0.0);
    qb.assign(static_cast<std::size_t>(kc), 0.0);
    for (int k = 0; k < kc; ++k) {
        const auto& o = p.outcomes[static_cast<std::size_t>(k)];
        double a = o.q[static_cast<std::size_t>(off)], b = o.q[static_cast<std::size_t>(off + 1)];
        double w = p_now * a + (1.0 - p_now) * b;
        double w2 = p_now * a * a + (1.0 - p_now) * b * b;
        r[static_cast<std::size_t>(k)] = o.t_obs - (mean_tot[static_cast<std::size_t>(k)] - w);
        vrem[static_cast<std::size_t>(k)] =
            var_tot[static_cast<std::size_t>(k)] - (w2 - w * w);
        qa[static_cast<std::size_t>(k)] = a;
        qb[static_cast<std::size_t>(k)] = b;
    }

    auto value_at = [&](double pp) {
        double y = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < kc; ++k) {
            const auto& o = p.outcomes[static_cast<std::size_t>(k)];
            double a = qa[static_cast<std::size_t>(k)], b = qb[static_cast<std::size_t>(k)];
            double w = b + pp * (a - b);
            double w2 = b * b + pp * (a * a - b * b);
            double centered = r[static_cast<std::size_t>(k)] - w;
            double zk;
            if (o.alternative == Alternative::greater && centered < 0.0)
                zk = kOneSidedPenalty;
            else if (o.alternative == Alternative::less && centered > 0.0)
                zk = kOneSidedPenalty;
            else
                zk = centered * centered -
                     o.threshold * (vrem[static_cast<std::size_t>(k)] + w2 - w * w);
            y = std::max(y, zk);
        }
        return y;
    };

    // quadratic coefficients of each zeta_k(p) on its active piece
    thread_local std::vector<double> A, B;
    A.assign(static_cast<std::size_t>(kc), 0.0);
    B.assign(static_cast<std::size_t>(kc), 0.0);
    thread_local std::vector<double> cand;
    cand.clear();
    cand.push_back(lo);
    cand.push_back(hi);
    for (int k = 0; k < kc; ++k) {
        const auto& o = p.outcomes[static_cast<std::size_t>(k)];
        double a = qa[static_cast<std::size_t>(k)], b = qb[static_cast<std::size_t>(k)];
        double d = a - b;
        double c1 = 1.0 + o.threshold;
        A[static_cast<std::size_t>(k)] = c1 * d * d;
        B[static_cast<std::size_t>(k)] = 2.0 * c1 * b * d -
                                         2.0 * r[static_cast<std::size_t>(k)] * d -
                                         o.threshold * (a * a - b * b);
        if (A[static_cast<std::size_t>(k)] > 0.0)
            cand.push_back(-B[static_cast<std::size_t>(k)] /
                           (2.0 * A[static_cast<std::size_t>(k)]));
        if (o.alternative != Alternative::two_sided && d != 0.0)
            cand.push_back((r[static_cast<std::size_t>(k)] - b) / d); // direction boundary
    }
    // crossings: zk(p) - zl(p) = da p^2 + db p + (zk(0) - zl(0))
    const auto value0 = [&](int kk) {
        const auto& o = p.outcomes[static_cast<std::size_t>(kk)];
        double b = qb[static_cast<std::size_t>(kk)];
        double centered = r[static_cast<std::size_t>(kk)] - b;
        return centered * centered - o.threshold * vrem[static_cast<std::size_t>(kk)];
    };
    for (int k = 0; k < kc; ++k) {
        for (int l = k + 1; l < kc; ++l) {
            double da = A[static_cast<std::size_t>(k)] - A[static_cast<std::size_t>(l)];
            double db = B[static_cast<std::size_t>(k)] - B[static_cast<std::size_t>(l)];
            double d0 = value0(k) - value0(l);
            if (std::fabs(da) < 1e-300) {
                if (std::fabs(db) > 1e-300) cand.push_back(-d0 / db);
                continue;
            }
            double disc = db * db - 4.0 * da * d0;
            if (disc >= 0.0) {
                double root = std::sqrt(disc);
                cand.push_back((-db + root) / (2.0 * da));
                cand.push_back((-db - root) / (2.0 * da));
            }
        }
    }

    double best_p = p_now, best_y = value_at(p_now);
    for (double c : cand) {
        double pp = std::clamp(c, lo, hi);
        double y = value_at(pp);
        if (y < best_y - 0.0) {
            best_y = y;
            best_p = pp;
        }
    }
    bool moved = best_p != p_now;
    if (moved) {
        rho[static_cast<std::size_t>(off)] = best_p;
        rho[static_cast<std::size_t>(off + 1)] = 1.0 - best_p;
        for (int k = 0; k < kc; ++k) {
            double a = qa[static_cast<std::size_t>(k)], b = qb[static_cast<std::size_t>(k)];
            double w = b + best_p * (a - b);
            double w2 = b * b + best_p * (a * a - b * b);
            mean_tot[static_cast<std::size_t>(k)] =
                (p.outcomes[static_cast<std::size_t>(k)].t_obs -
                 r[static_cast<std::size_t>(k)]) +
                w;
            var_tot[static_cast<std::size_t>(k)] =
                vrem[static_cast<std::size_t>(k)] + w2 - w * w;
        }
    }
    if (objective_out) *objective_out = best_y;
    return moved;
}

} // namespace detail

MinimaxSolution solve_minimax(const MinimaxProblem& problem, const SolverConfig& config = {});

namespace detail {

// Local polish of one stratum with n > 2: shrinking within-stratum transfers
// of probability mass, projected back onto the stratum polytope.
inline bool polish_general_block(const MinimaxProblem& p, int stratum,
                                 std::vector<double>& rho, Evaluator& eval) {
    const int off = p.offsets[static_cast<std::size_t>(stratum)];
    const int n = p.sizes[static_cast<std::size_t>(stratum)];
    eval.refresh(rho);
    double best = eval.objective();
    bool improved_any = false;
    std::vector<double> trial(rho);
    for (double step = 0.25; step > 1e-7; step *= 0.5) {
        bool improved = true;
        int guard = 0;
        while (improved && guard++ < 40) {
            improved = false;
            for (int j1 = 0; j1 < n; ++j1) {
                for (int j2 = 0; j2 < n; ++j2) {
                    if (j1 == j2) continue;
                    std::copy(rho.begin() + off, rho.begin() + off + n, trial.begin() + off);
                    trial[static_cast<std::size_t>(off + j1)] += step;
                    trial[static_cast<std::size_t>(off + j2)] -= step;
                    project_onto_stratum(trial.data() + off, n, p.gamma, trial.data() + off);
                    eval.refresh(trial);
                    double y = eval.objective();
                    if (y < best - 1e-15 * std::max(1.0, std::fabs(best))) {
                        best = y;
                        std::copy(trial.begin() + off, trial.begin() + off + n,
                                  rho.begin() + off);
                        improved = true;
                        improved_any = true;
                    }
                }
            }
        }
    }
    return improved_any;
}

// Joint pattern search over within-stratum transfers, including combined
// two-stratum moves so ridges between outcome pieces can be crossed.
inline void joint_pattern_search(const MinimaxProblem& p, std::vector<double>& rho,
                                 double& best_y) {
    struct Move {
        int stratum, from, to;
    };
    std::vector<Move> moves;
    for (int i = 0; i < p.strata(); ++i) {
        int n = p.sizes[static_cast<std::size_t>(i)];
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                if (a != b) moves.push_back({i, a, b});
    }
    Evaluator eval(p);
    std::vector<double> trial;
    auto apply = [&](std::vector<double>& x, const Move& m, double step) {
        int off = p.offsets[static_cast<std::size_t>(m.stratum)];
        int n = p.sizes[static_cast<std::size_t>(m.stratum)];
        x[static_cast<std::size_t>(off + m.to)] += step;
        x[static_cast<std::size_t>(off + m.from)] -= step;
        project_onto_stratum(x.data() + off, n, p.gamma, x.data() + off);
    };
    const bool pair_moves = p.total() <= 16;
    for (double step = 0.1; step > 1e-7; step *= 0.5) {
        bool improved = true;
        int guard = 0;
        while (improved && guard++ < 60) {
            improved = false;
            for (std::size_t a = 0; a < moves.size(); ++a) {
                trial = rho;
                apply(trial, moves[a], step);
                eval.refresh(trial);
                double y = eval.objective();
                if (y < best_y - 1e-15 * std::max(1.0, std::fabs(best_y))) {
                    best_y = y;
                    rho = trial;
                    improved = true;
                    continue;
                }
                if (!pair_moves) continue;
                for (std::size_t b = a + 1; b < moves.size(); ++b) {
                    if (moves[b].stratum == moves[a].stratum) continue;
                    trial = rho;
                    apply(trial, moves[a], step);
                    apply(trial, moves[b], step);
                    eval.refresh(trial);
                    y = eval.objective();
                    if (y < best_y - 1e-15 * std::max(1.0, std::fabs(best_y))) {
                        best_y = y;
                        rho = trial;
                        improved = true;
                        break;
                    }
                }
            }
        }
    }
}

inline void zeta_gradient(const MinimaxProblem& p, int k, const std::vector<double>& rho,
                          std::vector<double>& grad) {
    const auto& o = p.outcomes[static_cast<std::size_t>(k)];
    MomentPair m = problem_moments(p, k, rho);
    double centered = o.t_obs - m.mean;
    for (int i = 0; i < p.strata(); ++i) {
        int off = p.offsets[static_cast<std::size_t>(i)];
        int n = p.sizes[static_cast<std::size_t>(i)];
        double a = 0.0;
        for (int j = 0; j < n; ++j)
            a += rho[static_cast<std::size_t>(off + j)] * o.q[static_cast<std::size_t>(off + j)];
        for (int j = 0; j < n; ++j) {
            double qv = o.q[static_cast<std::size_t>(off + j)];
            grad[static_cast<std::size_t>(off + j)] =
                -2.0 * centered * qv - o.threshold * (qv * qv - 2.0 * a * qv);
        }
    }
}

// Bundle-style finisher in confounder space, where the feasible set is the
// plain box [0,1]^N and ratio-boundary optima become box faces. The step
// direction is the negated minimum-norm point of the convex hull of the
// active outcome gradients (Frank-Wolfe), computed inside a shared free
// subspace with gradient-projection active-set identification: coordinates
// whose combined direction would leave the box are clamped for every
// gradient and the combination recomputed. This descends ridges where tied
// outcomes have near-opposite gradients, which axis moves and plain gradient
// steps cannot follow.
inline bool active_set_polish_u(const MinimaxProblem& p, std::vector<double>& u, double& best_y,
                                int max_iters) {
    const int total = p.total();
    const int kc = p.outcome_count();
    Evaluator eval(p);
    std::vector<std::vector<double>> grads(static_cast<std::size_t>(kc));
    std::vector<double> grho(static_cast<std::size_t>(total));
    std::vector<double> g(static_cast<std::size_t>(total));
    std::vector<double> trial_u(static_cast<std::size_t>(total));
    std::vector<std::uint8_t> clamped(static_cast<std::size_t>(total), 0);
    const double log_gamma = std::log(p.gamma);
    bool improved_any = false;

    auto min_norm_combination = [&](const std::vector<int>& active) {
        std::copy(grads[static_cast<std::size_t>(active.front())].begin(),
                  grads[static_cast<std::size_t>(active.front())].end(), g.begin());
        if (active.size() == 1) return;
        for (int t = 0; t < 300; ++t) {
            int vertex = active.front();
            double best_dot = std::numeric_limits<double>::infinity();
            for (int k : active) {
                double dot = 0.0;
                for (int m = 0; m < total; ++m)
                    dot += grads[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)] *
                           g[static_cast<std::size_t>(m)];
                if (dot < best_dot) {
                    best_dot = dot;
                    vertex = k;
                }
            }
            double gg = 0.0, gd = 0.0, dd = 0.0;
            for (int m = 0; m < total; ++m) {
                double dm = grads[static_cast<std::size_t>(vertex)][static_cast<std::size_t>(m)] -
                            g[static_cast<std::size_t>(m)];
                gg += g[static_cast<std::size_t>(m)] * g[static_cast<std::size_t>(m)];
                gd += g[static_cast<std::size_t>(m)] * dm;
                dd += dm * dm;
            }
            if (dd < 1e-300 || gd >= -1e-16 * std::max(1.0, gg)) break;
            double step = std::clamp(-gd / dd, 0.0, 1.0);
            if (step == 0.0) break;
            for (int m = 0; m < total; ++m)
                g[static_cast<std::size_t>(m)] +=
                    step * (grads[static_cast<std::size_t>(vertex)][static_cast<std::size_t>(m)] -
                            g[static_cast<std::size_t>(m)]);
        }
    };

    for (int iter = 0; iter < max_iters; ++iter) {
        std::vector<double> rho = rho_from_confounder(u, p.gamma, p.sizes);
        eval.refresh(rho);
        double y = eval.objective();
        if (y <= kOneSidedPenalty) break;
        if (y < best_y) best_y = y;
        double act_tol = 1e-9 * std::max(1.0, std::fabs(y));
        std::vector<int> active;
        for (int k = 0; k < kc; ++k)
            if (eval.zeta_k(k) >= y - act_tol) active.push_back(k);
        for (int k : active) {
            auto& gu = grads[static_cast<std::size_t>(k)];
            gu.assign(static_cast<std::size_t>(total), 0.0);
            zeta_gradient(p, k, rho, grho);
            for (int i = 0; i < p.strata(); ++i) {
                int off = p.offsets[static_cast<std::size_t>(i)];
                int n = p.sizes[static_cast<std::size_t>(i)];
                double avg = 0.0;
                for (int j = 0; j < n; ++j)
                    avg += rho[static_cast<std::size_t>(off + j)] *
                           grho[static_cast<std::size_t>(off + j)];
                for (int j = 0; j < n; ++j)
                    gu[static_cast<std::size_t>(off + j)] =
                        log_gamma * rho[static_cast<std::size_t>(off + j)] *
                        (grho[static_cast<std::size_t>(off + j)] - avg);
            }
        }
        // gradient projection with a growing shared clamp set
        std::fill(clamped.begin(), clamped.end(), 0);
        double gnorm = 0.0;
        for (int round = 0; round < total + 1; ++round) {
            min_norm_combination(active);
            bool grew = false;
            for (int m = 0; m < total; ++m) {
                if (clamped[static_cast<std::size_t>(m)]) continue;
                bool at_low = u[static_cast<std::size_t>(m)] <= 0.0;
                bool at_high = u[static_cast<std::size_t>(m)] >= 1.0;
                // the move is u - alpha*g: blocked when it points outside
                if ((at_low && g[static_cast<std::size_t>(m)] > 0.0) ||
                    (at_high && g[static_cast<std::size_t>(m)] < 0.0)) {
                    clamped[static_cast<std::size_t>(m)] = 1;
                    for (int k : active)
                        grads[static_cast<std::size_t>(k)][static_cast<std::size_t>(m)] = 0.0;
                    grew = true;
                }
            }
            if (!grew) break;
        }
        gnorm = 0.0;
        for (int m = 0; m < total; ++m)
            gnorm += g[static_cast<std::size_t>(m)] * g[static_cast<std::size_t>(m)];
        gnorm = std::sqrt(gnorm);
        if (gnorm < 1e-300) break;
        double best_step_y = y;
        double best_alpha = 0.0;
        for (double alpha = 0.5; alpha > 1e-10; alpha *= 0.5) {
            for (int m = 0; m < total; ++m)
                trial_u[static_cast<std::size_t>(m)] = std::clamp(
                    u[static_cast<std::size_t>(m)] - alpha / gnorm * g[static_cast<std::size_t>(m)],
                    0.0, 1.0);
            std::vector<double> trial_rho = rho_from_confounder(trial_u, p.gamma, p.sizes);
            eval.refresh(trial_rho);
            double v = eval.objective();
            if (v < best_step_y) {
                best_step_y = v;
                best_alpha = alpha;
            }
        }
        if (best_alpha == 0.0) break;
        for (int m = 0; m < total; ++m)
            u[static_cast<std::size_t>(m)] = std::clamp(
                u[static_cast<std::size_t>(m)] - best_alpha / gnorm * g[static_cast<std::size_t>(m)],
                0.0, 1.0);
        improved_any = true;
        if (best_step_y < best_y) best_y = best_step_y;
    }
    return improved_any;
}

// Downhill-simplex finisher over clamped confounder coordinates, evaluated
// through the solver's own moment accumulators. The adapting simplex escapes
// the spurious stationary points that the softmax parameterization creates
// on box faces, where straight-line searches stall.
inline void simplex_polish_u(const MinimaxProblem& p, std::vector<double>& u, double& best_y) {
    const int n = p.total();
    Evaluator ev(p);
    auto eval = [&](std::vector<double> x) {
        for (auto& v : x) v = std::clamp(v, 0.0, 1.0);
        ev.refresh(rho_from_confounder(x, p.gamma, p.sizes));
        return ev.objective();
    };
    for (double radius : {0.15, 0.03, 0.006, 1.2e-3, 2.4e-4}) {
        std::vector<std::vector<double>> simplex{u};
        std::vector<double> values{best_y};
        for (int j = 0; j < n; ++j) {
            std::vector<double> x = u;
            x[static_cast<std::size_t>(j)] +=
                x[static_cast<std::size_t>(j)] + radius <= 1.0 ? radius : -radius;
            simplex.push_back(x);
            values.push_back(eval(x));
        }
        for (int it = 0; it < 300 * n; ++it) {
            std::size_t best = 0, worst = 0;
            for (std::size_t i = 1; i < values.size(); ++i) {
                if (values[i] < values[best]) best = i;
                if (values[i] > values[worst]) worst = i;
            }
            std::size_t second = best;
            for (std::size_t i = 0; i < values.size(); ++i)
                if (i != worst && values[i] > values[second]) second = i;
            if (values[worst] - values[best] <
                1e-13 * std::max(1.0, std::fabs(values[best])))
                break;
            std::vector<double> centroid(static_cast<std::size_t>(n), 0.0);
            for (std::size_t i = 0; i < simplex.size(); ++i) {
                if (i == worst) continue;
                for (int j = 0; j < n; ++j)
                    centroid[static_cast<std::size_t>(j)] +=
                        simplex[i][static_cast<std::size_t>(j)] / n;
            }
            auto blend = [&](double coef) {
                std::vector<double> x(static_cast<std::size_t>(n));
                for (int j = 0; j < n; ++j)
                    x[static_cast<std::size_t>(j)] = std::clamp(
                        centroid[static_cast<std::size_t>(j)] +
                            coef * (simplex[worst][static_cast<std::size_t>(j)] -
                                    centroid[static_cast<std::size_t>(j)]),
                        0.0, 1.0);
                return x;
            };
            std::vector<double> reflected = blend(-1.0);
            double fr = eval(reflected);
            if (fr < values[best]) {
                std::vector<double> expanded = blend(-2.0);
                double fe = eval(expanded);
                if (fe < fr) {
                    simplex[worst] = expanded;
                    values[worst] = fe;
                } else {
                    simplex[worst] = reflected;
                    values[worst] = fr;
                }
            } else if (fr < values[second]) {
                simplex[worst] = reflected;
                values[worst] = fr;
            } else {
                std::vector<double> contracted = blend(0.5);
                double fc = eval(contracted);
                if (fc < values[worst]) {
                    simplex[worst] = contracted;
                    values[worst] = fc;
                } else {
                    for (std::size_t i = 0; i < simplex.size(); ++i) {
                        if (i == best) continue;
                        for (int j = 0; j < n; ++j)
                            simplex[i][static_cast<std::size_t>(j)] =
                                0.5 * (simplex[i][static_cast<std::size_t>(j)] +
                                       simplex[best][static_cast<std::size_t>(j)]);
                        values[i] = eval(simplex[i]);
                    }
                }
            }
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < values.size(); ++i)
            if (values[i] < values[best]) best = i;
        if (values[best] < best_y) {
            best_y = values[best];
            u = simplex[best];
            for (auto& v : u) v = std::clamp(v, 0.0, 1.0);
        }
    }
}

inline StartResult descend(const MinimaxProblem& p, std::vector<double> rho,
                           const SolverConfig& cfg, double scale) {
    Evaluator eval(p);
    eval.refresh(rho);
    StartResult out;
    out.rho = rho;
    out.y = eval.objective();

    const int total = p.total();
    std::vector<double> grad(static_cast<std::size_t>(total));
    std::vector<double> trial(static_cast<std::size_t>(total));
    long iterations = 0;
    double step = 1.0;

    for (double t_rel : cfg.temperature_schedule) {
        double temperature = t_rel * scale;
        double last = std::numeric_limits<double>::infinity();
        int stall = 0;
        for (int it = 0; it < cfg.iterations_per_temperature; ++it) {
            if (iterations >= cfg.iteration_cap) {
                out.converged = false;
                break;
            }
            ++iterations;
            double f = eval.smoothed(rho, temperature, &grad);
            if (f <= kOneSidedPenalty) break; // all outcomes blocked: global floor
            double gnorm = 0.0;
            for (double g : grad) gnorm += g * g;
            gnorm = std::sqrt(gnorm);
            if (gnorm < 1e-300) break;
            bool accepted = false;
            double alpha = step;
            for (int bt = 0; bt < 40 && !accepted; ++bt) {
                for (int m = 0; m < total; ++m)
                    trial[static_cast<std::size_t>(m)] =
                        rho[static_cast<std::size_t>(m)] -
                        alpha / gnorm * grad[static_cast<std::size_t>(m)];
                project_feasible(trial, p);
                double ft = eval.smoothed(trial, temperature, nullptr);
                if (ft < f) {
                    rho = trial;
                    step = std::min(alpha * 1.5, 1.0);
                    accepted = true;
                    eval.refresh(rho);
                    double y = eval.objective();
                    if (y < out.y) {
                        out.y = y;
                        out.rho = rho;
                    }
                    if (cfg.iterate_hook) cfg.iterate_hook(rho);
                    if (last - ft < cfg.improvement_tol * std::max(1.0, scale / 1e6)) {
                        if (++stall >= cfg.stall_window) { it = cfg.iterations_per_temperature; }
                    } else {
                        stall = 0;
                    }
                    last = ft;
                } else {
                    alpha *= 0.5;
                }
            }
            if (!accepted) break; // no descent at this temperature
        }
    }

    // exact per-stratum polishing on the true objective
    Evaluator pol(p);
    pol.refresh(out.rho);
    std::vector<double> mean_tot = pol.mean, var_tot = pol.var;
    rho = out.rho;
    for (int pass = 0; pass < cfg.polish_passes; ++pass) {
        bool moved = false;
        for (int i = 0; i < p.strata(); ++i) {
            if (p.sizes[static_cast<std::size_t>(i)] == 2) {
                double y = 0.0;
                if (polish_pair_block(p, i, rho, mean_tot, var_tot, &y)) moved = true;
            } else {
                if (polish_general_block(p, i, rho, pol)) {
                    pol.refresh(rho);
                    mean_tot = pol.mean;
                    var_tot = pol.var;
                    moved = true;
                }
            }
        }
        if ((pass & 7) == 7) { // refresh totals against drift
            pol.refresh(rho);
            mean_tot = pol.mean;
            var_tot = pol.var;
        }
        if (!moved) break;
    }
    pol.refresh(rho);
    double y = pol.objective();
    if (y < out.y) {
        out.y = y;
        out.rho = rho;
    }
    // bundle-style finisher from the best point of this start
    {
        std::vector<double> u = confounder_from_rho(out.rho, p.gamma, p.sizes);
        double y_u = out.y;
        active_set_polish_u(p, u, y_u, p.total() <= 64 ? 400 : 80);
        if (y_u < out.y) {
            out.y = y_u;
            out.rho = rho_from_confounder(u, p.gamma, p.sizes);
        }
    }
    out.iterations = iterations;
    return out;
}

inline bool rho_less(const std::vector<double>& a, const std::vector<double>& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        double ra = std::round(a[i] * 1e12), rb = std::round(b[i] * 1e12);
        if (ra != rb) return ra < rb;
    }
    return false;
}

} // namespace detail

inline MinimaxSolution finalize_solution(const MinimaxProblem& p, std::vector<double> rho) {
    MinimaxSolution sol;
    sol.assignment.rho = std::move(rho);
    sol.assignment.gamma = p.gamma;
    sol.assignment.s = stratum_scales(sol.assignment.rho, p.sizes);
    sol.u = confounder_from_rho(sol.assignment.rho, p.gamma, p.sizes);
    sol.zeta_values.resize(static_cast<std::size_t>(p.outcome_count()));
    double y = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < p.outcome_count(); ++k) {
        sol.zeta_values[static_cast<std::size_t>(k)] = zeta_tilde(p, k, sol.assignment.rho);
        y = std::max(y, sol.zeta_values[static_cast<std::size_t>(k)]);
    }
    sol.y = y;
    sol.reject = y >= 0.0;
    return sol;
}

inline MinimaxSolution solve_minimax(const MinimaxProblem& problem, const SolverConfig& config) {
    if (!(problem.gamma >= 1.0)) throw input_error("gamma must be >= 1");
    if (problem.outcome_count() < 1) throw input_error("no outcomes in problem");

    if (problem.gamma == 1.0) {
        // singleton feasible set: the uniform point is the whole analysis
        MinimaxSolution sol = finalize_solution(problem, uniform_rho(problem.sizes));
        sol.converged = true;
        return sol;
    }

    std::vector<std::vector<double>> starts;
    starts.push_back(uniform_rho(problem.sizes));
    if (config.separable_starts) {
        for (int k = 0; k < problem.outcome_count(); ++k) {
            for (bool maximize : {true, false}) {
                std::vector<double> rho(static_cast<std::size_t>(problem.total()));
                for (int i = 0; i < problem.strata(); ++i) {
                    int off = problem.offsets[static_cast<std::size_t>(i)];
                    detail::extreme_mean_pattern(
                        problem.outcomes[static_cast<std::size_t>(k)].q.data() + off,
                        problem.sizes[static_cast<std::size_t>(i)], problem.gamma, maximize,
                        rho.data() + off);
                }
                starts.push_back(std::move(rho));
            }
        }
    }
    for (const auto& u : config.warm_start_confounders) {
        if (static_cast<int>(u.size()) == problem.total())
            starts.push_back(rho_from_confounder(u, problem.gamma, problem.sizes));
    }
    for (int r = 0; r < config.random_starts; ++r) {
        Rng rng(config.seed, static_cast<std::uint64_t>(r));
        std::vector<double> u(static_cast<std::size_t>(problem.total()));
        for (auto& v : u) v = rng.uniform();
        starts.push_back(rho_from_confounder(u, problem.gamma, problem.sizes));
    }

    // common objective scale for the temperature schedule
    double scale = 1.0;
    {
        std::vector<double> uni = uniform_rho(problem.sizes);
        for (int k = 0; k < problem.outcome_count(); ++k) {
            double z = zeta(problem, k, uni);
            scale = std::max(scale, std::fabs(z));
        }
    }

    std::vector<detail::StartResult> results(starts.size());
    parallel_for(starts.size(), config.threads, [&](std::size_t s) {
        results[s] = detail::descend(problem, starts[s], config, scale);
    });

    std::size_t best = 0;
    for (std::size_t s = 1; s < results.size(); ++s) {
        if (results[s].y < results[best].y - 0.0 ||
            (results[s].y == results[best].y && detail::rho_less(results[s].rho, results[best].rho)))
            best = s;
    }
    if (problem.total() <= config.pattern_search_max_total)
        detail::joint_pattern_search(problem, results[best].rho, results[best].y);
    if (config.final_sharpening) {
        SolverConfig fine = config;
        fine.temperature_schedule = {1e-8, 1e-10};
        fine.iterations_per_temperature = 4000;
        detail::StartResult sharp = detail::descend(problem, results[best].rho, fine, scale);
        if (sharp.y < results[best].y) {
            results[best].y = sharp.y;
            results[best].rho = sharp.rho;
        }
        if (problem.total() <= config.pattern_search_max_total)
            detail::joint_pattern_search(problem, results[best].rho, results[best].y);
        std::vector<double> u = confounder_from_rho(results[best].rho, problem.gamma,
                                                    problem.sizes);
        double y_u = results[best].y;
        for (int round = 0; round < 3; ++round) {
            detail::active_set_polish_u(problem, u, y_u, problem.total() <= 64 ? 400 : 60);
            if (problem.total() <= config.pattern_search_max_total)
                detail::simplex_polish_u(problem, u, y_u);
        }
        if (y_u < results[best].y) {
            results[best].y = y_u;
            results[best].rho = rho_from_confounder(u, problem.gamma, problem.sizes);
        }
    }

    MinimaxSolution sol = finalize_solution(problem, results[best].rho);
    sol.starts = static_cast<int>(starts.size());
    for (const auto& r : results) {
        sol.iterations += r.iterations;
        sol.converged = sol.converged && r.converged;
    }
    if (!sol.converged)
        sol.message = "iteration budget exhausted on at least one start; best incumbent returned";
    return sol;
}

} // namespace sensi
