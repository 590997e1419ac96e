#pragma once

// Shared helpers for the test suites: small design builders and independent
// reference implementations used as oracles. The references deliberately
// avoid the library's code paths (different enumeration order, different
// probability algebra) so agreement is meaningful.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "sensi/design.hpp"
#include "sensi/minimax.hpp"
#include "sensi/stats.hpp"

namespace testref {

// Design with one treated per stratum from explicit outcome tables:
// outcomes[i][j][k], treated[i] = index of the treated member.
inline sensi::MatchedDesign make_design(
    const std::vector<std::vector<std::vector<double>>>& outcomes,
    const std::vector<int>& treated) {
    sensi::MatchedDesign d;
    const int k_count = static_cast<int>(outcomes.front().front().size());
    for (int k = 0; k < k_count; ++k) d.outcome_names.push_back("y" + std::to_string(k + 1));
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        sensi::Stratum s;
        s.id = "s" + std::to_string(i + 1);
        for (std::size_t j = 0; j < outcomes[i].size(); ++j) {
            s.treated.push_back(static_cast<int>(j) == treated[i] ? 1 : 0);
            s.outcomes.push_back(outcomes[i][j]);
        }
        d.strata.push_back(std::move(s));
    }
    return d;
}

inline sensi::MatchedDesign pairs_design(const std::vector<std::array<double, 2>>& values,
                                         int treated_member = 0) {
    sensi::MatchedDesign d;
    d.outcome_names = {"y1"};
    for (std::size_t i = 0; i < values.size(); ++i) {
        sensi::Stratum s;
        s.id = "p" + std::to_string(i + 1);
        s.treated = {treated_member == 0 ? std::uint8_t(1) : std::uint8_t(0),
                     treated_member == 0 ? std::uint8_t(0) : std::uint8_t(1)};
        s.outcomes = {{values[i][0]}, {values[i][1]}};
        d.strata.push_back(std::move(s));
    }
    return d;
}

inline sensi::ScoreMatrix sharp_scores(const sensi::MatchedDesign& d, sensi::StatKind kind) {
    sensi::HypothesisSpec spec = sensi::HypothesisSpec::sharp(d.outcome_count());
    sensi::OutcomeMatrix f = sensi::apply_hypothesis(d, spec);
    std::vector<sensi::StatKind> kinds(static_cast<std::size_t>(d.outcome_count()), kind);
    return sensi::build_scores(f, d, kinds);
}

// Reference tail count by odometer iteration (no recursion, per-assignment
// fresh summation).
inline std::pair<std::uint64_t, std::uint64_t> tail_count(const std::vector<double>& q,
                                                          const std::vector<int>& sizes,
                                                          double a) {
    std::vector<int> offsets{0};
    for (int n : sizes) offsets.push_back(offsets.back() + n);
    std::uint64_t omega = 1;
    for (int n : sizes) omega *= static_cast<std::uint64_t>(n);
    std::uint64_t count = 0;
    std::vector<int> pick(sizes.size(), 0);
    for (std::uint64_t it = 0; it < omega; ++it) {
        double t = 0.0;
        std::uint64_t code = it;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            int n = sizes[i];
            pick[i] = static_cast<int>(code % static_cast<std::uint64_t>(n));
            code /= static_cast<std::uint64_t>(n);
            t += q[static_cast<std::size_t>(offsets[i] + pick[i])];
        }
        if (t >= a) ++count;
    }
    return {count, omega};
}

// Reference moments under explicit assignment probabilities, q laid out per
// stratum; written with plain loops over a probability map built locally.
inline std::pair<double, double> moments_at_u(const std::vector<double>& q,
                                              const std::vector<int>& sizes,
                                              const std::vector<double>& u, double gamma) {
    std::vector<int> offsets{0};
    for (int n : sizes) offsets.push_back(offsets.back() + n);
    double mean = 0.0, var = 0.0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        int n = sizes[i];
        double z = 0.0;
        for (int j = 0; j < n; ++j) z += std::pow(gamma, u[static_cast<std::size_t>(offsets[i] + j)]);
        double m1 = 0.0, m2 = 0.0;
        for (int j = 0; j < n; ++j) {
            double p = std::pow(gamma, u[static_cast<std::size_t>(offsets[i] + j)]) / z;
            m1 += p * q[static_cast<std::size_t>(offsets[i] + j)];
            m2 += p * q[static_cast<std::size_t>(offsets[i] + j)] *
                  q[static_cast<std::size_t>(offsets[i] + j)];
        }
        mean += m1;
        var += m2 - m1 * m1;
    }
    return {mean, var};
}

// Exhaustive binary-u worst-case mean for a single stratum (reference for the
// separable selection), independent of the library's candidate code.
inline double stratum_extreme_mean(const std::vector<double>& q, double gamma, bool maximize) {
    const int n = static_cast<int>(q.size());
    double best = maximize ? -1e300 : 1e300;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        double wsum = 0.0, m = 0.0;
        for (int j = 0; j < n; ++j) {
            double w = (mask >> j) & 1u ? gamma : 1.0;
            wsum += w;
            m += w * q[static_cast<std::size_t>(j)];
        }
        m /= wsum;
        best = maximize ? std::max(best, m) : std::min(best, m);
    }
    return best;
}

} // namespace testref
