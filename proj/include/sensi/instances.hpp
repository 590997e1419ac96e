#pragma once

// Seeded small-instance generators for oracle checks: random designs with a
// handful of strata, and the adversarial opposed-outcome pair family where
// the per-outcome worst-case confounders conflict inside every pair and the
// joint optimum sits at fractional u.

#include <cstdint>
#include <string>
#include <vector>

#include "sensi/design.hpp"
#include "sensi/rng.hpp"
#include "sensi/stats.hpp"

namespace sensi {

// Random design with N <= n_max members split into strata of size 2..4 and
// k_count outcomes; outcomes are small integers so score ties occur.
inline MatchedDesign random_small_design(Rng& rng, int n_max, int k_count) {
    MatchedDesign design;
    for (int k = 0; k < k_count; ++k)
        design.outcome_names.push_back("y" + std::to_string(k + 1));
    int used = 0;
    int idx = 0;
    while (used + 2 <= n_max) {
        int room = n_max - used;
        int n = 2 + static_cast<int>(rng.uniform_int(0, std::min(2, room - 2)));
        Stratum s;
        s.id = "s" + std::to_string(++idx);
        int treated = static_cast<int>(rng.uniform_int(0, n - 1));
        for (int j = 0; j < n; ++j) {
            s.treated.push_back(j == treated ? 1 : 0);
            std::vector<double> row;
            for (int k = 0; k < k_count; ++k)
                row.push_back(static_cast<double>(rng.uniform_int(-4, 8)));
            s.outcomes.push_back(std::move(row));
        }
        design.strata.push_back(std::move(s));
        used += n;
        if (rng.uniform() < 0.2) break; // sometimes stop before filling n_max
    }
    return design;
}

// Balanced blocks of two pairs in which outcome 1 favors one member and
// outcome 2 the other while both observed statistics stay above their uniform
// means: the first pair of each block carries outcome 1's evidence (treated
// member high on y1, control high on y2), the second carries outcome 2's.
// The single-outcome worst cases then pull every pair's assignment
// probabilities in opposite directions and the joint optimum compromises at
// fractional u.
inline MatchedDesign opposed_outcome_pairs(Rng& rng, int blocks, double base = 8.0) {
    MatchedDesign design;
    design.outcome_names = {"y1", "y2"};
    for (int i = 0; i < 2 * blocks; ++i) {
        double big = base + rng.uniform() * 2.0;
        double small = 0.55 * base + rng.uniform() * 1.5;
        Stratum s;
        s.id = "p" + std::to_string(i + 1);
        s.treated = {1, 0};
        if (i % 2 == 0)
            s.outcomes = {{big, 0.0}, {0.0, small}}; // y1: +big, y2: -small
        else
            s.outcomes = {{0.0, big}, {small, 0.0}}; // y1: -small, y2: +big
        design.strata.push_back(std::move(s));
    }
    return design;
}

} // namespace sensi
