#pragma once

// Score constants q_ijk for the supported sum statistics t_k = sum_ij Z_ij q_ijk,
// plus the observed values t_k. Ties get midranks throughout.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "sensi/design.hpp"
#include "sensi/error.hpp"

namespace sensi {

enum class StatKind { mean_difference, aligned_rank, signed_rank, huber_m };

inline const char* stat_name(StatKind s) {
    switch (s) {
        case StatKind::mean_difference: return "mean-diff";
        case StatKind::aligned_rank: return "aligned-rank";
        case StatKind::signed_rank: return "signed-rank";
        case StatKind::huber_m: return "huber-m";
    }
    return "?";
}

struct ScoreMatrix {
    // columns[k][m]: score of global member m for outcome k (orientation applied)
    std::vector<std::vector<double>> columns;
    std::vector<double> t_obs;
    std::vector<StatKind> kinds;

    int outcome_count() const { return static_cast<int>(columns.size()); }
};

namespace detail {

// Midranks 1..n of v (average rank across ties).
inline std::vector<double> midranks(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) rank[idx[t]] = avg;
        i = j + 1;
    }
    return rank;
}

inline double median_abs(std::vector<double> v) {
    for (auto& x : v) x = std::fabs(x);
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n == 0) return 0.0;
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace detail

// Huber psi with sign(0) = 0.
inline double huber_psi(double y, double trunc = 2.5) {
    if (y == 0.0) return 0.0;
    double m = std::min(std::fabs(y), trunc);
    return y > 0.0 ? m : -m;
}

// q_ijk = sum_{j' != j} (F_ijk - F_ij'k) / (I (n_i - 1)): the mean over matched
// sets of the average treated-minus-control difference. For pairs this is the
// paired permutation t-statistic.
inline std::vector<double> mean_difference_scores(const OutcomeMatrix& f,
                                                  const MatchedDesign& design, int k) {
    std::vector<double> q;
    q.reserve(static_cast<std::size_t>(f.rows));
    const double big_i = static_cast<double>(design.stratum_count());
    int row = 0;
    for (const auto& s : design.strata) {
        const int n = s.size();
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += f.at(row + j, k);
        for (int j = 0; j < n; ++j) {
            double v = f.at(row + j, k);
            q.push_back((n * v - sum) / (big_i * (n - 1)));
        }
        row += n;
    }
    return q;
}

// Ranks 1..N of the stratum-mean-aligned responses.
inline std::vector<double> aligned_rank_scores(const OutcomeMatrix& f,
                                               const MatchedDesign& design, int k) {
    std::vector<double> aligned;
    aligned.reserve(static_cast<std::size_t>(f.rows));
    int row = 0;
    for (const auto& s : design.strata) {
        const int n = s.size();
        double mean = 0.0;
        for (int j = 0; j < n; ++j) mean += f.at(row + j, k);
        mean /= n;
        for (int j = 0; j < n; ++j) aligned.push_back(f.at(row + j, k) - mean);
        row += n;
    }
    return detail::midranks(aligned);
}

// Wilcoxon signed rank for pairs: d_i ranks the nonzero |F_i1 - F_i2|; the
// member with the larger value scores d_i, the other 0. Zero-difference pairs
// score 0 for both members and are excluded from the ranking.
inline std::vector<double> signed_rank_scores(const OutcomeMatrix& f,
                                              const MatchedDesign& design, int k) {
    if (!design.all_pairs())
        throw input_error("signed-rank statistic requires a paired design");
    const int pairs = design.stratum_count();
    std::vector<double> adiff;
    std::vector<int> nonzero;
    int row = 0;
    for (int i = 0; i < pairs; ++i) {
        double d = f.at(row, k) - f.at(row + 1, k);
        if (d != 0.0) {
            adiff.push_back(std::fabs(d));
            nonzero.push_back(i);
        }
        row += 2;
    }
    std::vector<double> d_rank = detail::midranks(adiff);
    std::vector<double> q(static_cast<std::size_t>(2 * pairs), 0.0);
    for (std::size_t t = 0; t < nonzero.size(); ++t) {
        int i = nonzero[t];
        double hi = d_rank[t];
        double d = f.at(2 * i, k) - f.at(2 * i + 1, k);
        if (d > 0.0)
            q[static_cast<std::size_t>(2 * i)] = hi;
        else
            q[static_cast<std::size_t>(2 * i + 1)] = hi;
    }
    return q;
}

// Huber M-statistic for pairs, encoded in sum-statistic form: with D_i the
// difference in the pair's fixed member order and s the median of |D_i|,
// member 1 scores psi(D_i/s) and member 2 scores psi(-D_i/s), so selecting the
// treated member reproduces sum psi(D_treated-minus-control / s).
inline std::vector<double> huber_m_scores(const OutcomeMatrix& f, const MatchedDesign& design,
                                          int k, double trunc = 2.5) {
    if (!design.all_pairs())
        throw input_error("huber-m statistic requires a paired design");
    const int pairs = design.stratum_count();
    std::vector<double> diffs(static_cast<std::size_t>(pairs));
    for (int i = 0; i < pairs; ++i)
        diffs[static_cast<std::size_t>(i)] = f.at(2 * i, k) - f.at(2 * i + 1, k);
    double scale = detail::median_abs(diffs);
    if (!(scale > 0.0))
        throw input_error("huber-m scale is zero (more than half of the pair "
                          "differences vanish) for outcome index " +
                          std::to_string(k));
    std::vector<double> q;
    q.reserve(static_cast<std::size_t>(2 * pairs));
    for (int i = 0; i < pairs; ++i) {
        double psi = huber_psi(diffs[static_cast<std::size_t>(i)] / scale, trunc);
        q.push_back(psi);
        q.push_back(-psi);
    }
    return q;
}

struct ScoreOptions {
    double huber_trunc = 2.5;
};

// Build all score columns, apply the per-stratum orientation set by
// canonicalization, and record the observed statistics.
inline ScoreMatrix build_scores(const OutcomeMatrix& f, const MatchedDesign& design,
                                const std::vector<StatKind>& kinds,
                                const ScoreOptions& opt = {}) {
    if (static_cast<int>(kinds.size()) != design.outcome_count())
        throw input_error("need one statistic kind per outcome");
    ScoreMatrix scores;
    scores.kinds = kinds;
    for (int k = 0; k < design.outcome_count(); ++k) {
        std::vector<double> q;
        switch (kinds[static_cast<std::size_t>(k)]) {
            case StatKind::mean_difference: q = mean_difference_scores(f, design, k); break;
            case StatKind::aligned_rank: q = aligned_rank_scores(f, design, k); break;
            case StatKind::signed_rank: q = signed_rank_scores(f, design, k); break;
            case StatKind::huber_m: q = huber_m_scores(f, design, k, opt.huber_trunc); break;
        }
        int row = 0;
        double t = 0.0;
        for (const auto& s : design.strata) {
            for (int j = 0; j < s.size(); ++j) {
                auto& v = q[static_cast<std::size_t>(row + j)];
                v *= s.orientation;
                if (s.treated[static_cast<std::size_t>(j)]) t += v;
            }
            row += s.size();
        }
        scores.columns.push_back(std::move(q));
        scores.t_obs.push_back(t);
    }
    return scores;
}

} // namespace sensi
