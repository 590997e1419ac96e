#pragma once

// Inference under uniform within-stratum assignment (Gamma = 1): moments of
// sum statistics, normal-approximation deviates, and exact enumeration of the
// assignment distribution for small designs.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sensi/design.hpp"
#include "sensi/normal.hpp"
#include "sensi/stats.hpp"

namespace sensi {

struct MomentPair {
    double mean = 0.0;
    double variance = 0.0;
};

// Moments of q over one stratum under assignment probabilities rho:
// mean = rho . q, variance = rho . q^2 - (rho . q)^2.
inline MomentPair stratum_moments(const double* q, const double* rho, int n) {
    double m = 0.0, m2 = 0.0;
    for (int j = 0; j < n; ++j) {
        m += rho[j] * q[j];
        m2 += rho[j] * q[j] * q[j];
    }
    return {m, m2 - m * m};
}

inline MomentPair uniform_moments(const ScoreMatrix& scores, const MatchedDesign& design,
                                  int k) {
    const auto& q = scores.columns[static_cast<std::size_t>(k)];
    MomentPair total;
    int row = 0;
    for (const auto& s : design.strata) {
        const int n = s.size();
        double m = 0.0, m2 = 0.0;
        for (int j = 0; j < n; ++j) {
            double v = q[static_cast<std::size_t>(row + j)];
            m += v;
            m2 += v * v;
        }
        m /= n;
        m2 /= n;
        total.mean += m;
        total.variance += m2 - m * m;
        row += n;
    }
    return total;
}

struct ExactTail {
    std::uint64_t count = 0;       // assignments with t >= a
    std::uint64_t assignments = 0; // |Omega|
    double probability = 0.0;
};

inline constexpr std::uint64_t kEnumerationCap = 1u << 20;

// P(t_k >= a) by exhaustive enumeration of the assignment space.
inline ExactTail exact_tail_probability(const ScoreMatrix& scores, const MatchedDesign& design,
                                        int k, double a,
                                        std::uint64_t cap = kEnumerationCap) {
    std::uint64_t omega = design.assignment_count(cap);
    if (omega > cap)
        throw cap_error("assignment space exceeds the enumeration cap of " +
                        std::to_string(cap));
    const auto& q = scores.columns[static_cast<std::size_t>(k)];
    const auto offsets = design.member_offsets();
    const int strata = design.stratum_count();

    std::uint64_t count = 0;
    std::vector<int> pick(static_cast<std::size_t>(strata), 0);
    std::vector<double> partial(static_cast<std::size_t>(strata) + 1, 0.0);
    int level = 0;
    while (true) {
        if (level == strata) {
            if (partial[static_cast<std::size_t>(strata)] >= a) ++count;
            --level;
            while (level >= 0) {
                int n = design.strata[static_cast<std::size_t>(level)].size();
                if (++pick[static_cast<std::size_t>(level)] < n) break;
                pick[static_cast<std::size_t>(level)] = 0;
                --level;
            }
            if (level < 0) break;
        }
        partial[static_cast<std::size_t>(level) + 1] =
            partial[static_cast<std::size_t>(level)] +
            q[static_cast<std::size_t>(offsets[static_cast<std::size_t>(level)] +
                                       pick[static_cast<std::size_t>(level)])];
        ++level;
    }
    return {count, omega, static_cast<double>(count) / static_cast<double>(omega)};
}

inline double deviate(double t, const MomentPair& m) {
    if (!(m.variance > 0.0)) throw input_error("degenerate statistic: zero variance");
    return (t - m.mean) / std::sqrt(m.variance);
}

inline double squared_deviate(double t, const MomentPair& m) {
    double d = deviate(t, m);
    return d * d;
}

inline double two_sided_pvalue(double dev) { return std::min(1.0, 2.0 * normal_sf(std::fabs(dev))); }

inline double one_sided_pvalue(double dev, Alternative alt) {
    switch (alt) {
        case Alternative::greater: return normal_sf(dev);
        case Alternative::less: return normal_cdf(dev);
        case Alternative::two_sided: return two_sided_pvalue(dev);
    }
    return 1.0;
}

} // namespace sensi
