#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sensi/instances.hpp"
#include "sensi/randomization.hpp"
#include "sensi/rng.hpp"
#include "sensi/sensitivity.hpp"
#include "support/test_helpers.hpp"

using namespace sensi;

TEST_CASE("stratum candidates carry the model-implied moments") {
    SECTION("pair at gamma 2") {
        auto cands = stratum_candidates({1.0, 0.0}, GammaValue(2.0));
        bool found = false;
        for (const auto& c : cands) {
            if (c.pattern == std::vector<std::uint8_t>{1, 0}) {
                found = true;
                CHECK(c.mean == Catch::Approx(2.0 / 3.0));
                CHECK(c.variance == Catch::Approx(2.0 / 9.0));
            }
        }
        CHECK(found);
    }
    SECTION("gamma 1 collapses to the uniform candidate") {
        auto cands = stratum_candidates({1.0, 0.0}, GammaValue(1.0));
        REQUIRE(cands.size() == 1);
        CHECK(cands[0].mean == Catch::Approx(0.5));
    }
    SECTION("triple stratum pattern 101 at gamma 3") {
        auto cands = stratum_candidates({3.0, 1.0, 2.0}, GammaValue(3.0));
        bool found = false;
        for (const auto& c : cands) {
            if (c.pattern == std::vector<std::uint8_t>{1, 0, 1}) {
                found = true;
                CHECK(c.mean == Catch::Approx(16.0 / 7.0));
            }
        }
        CHECK(found);
    }
}

TEST_CASE("separable worst case on a single pair") {
    MatchedDesign d = testref::pairs_design({{1.0, 0.0}});
    ScoreMatrix s = testref::sharp_scores(d, StatKind::mean_difference);
    s.columns[0] = {1.0, 0.0};
    s.t_obs[0] = 1.0;
    WorstCaseBound b = separable_worst_case(s, d, 0, GammaValue(2.0), true);
    CHECK(b.mean == Catch::Approx(2.0 / 3.0));
    CHECK(b.variance == Catch::Approx(2.0 / 9.0));
    CHECK(b.deviate == Catch::Approx((1.0 - 2.0 / 3.0) / std::sqrt(2.0 / 9.0)).margin(1e-12));
}

TEST_CASE("separable worst case reduces to uniform moments at gamma 1") {
    Rng rng(7, 2);
    for (int trial = 0; trial < 10; ++trial) {
        MatchedDesign d = random_small_design(rng, 10, 1);
        ScoreMatrix s = testref::sharp_scores(d, StatKind::aligned_rank);
        WorstCaseBound b = separable_worst_case(s, d, 0, GammaValue(1.0), true);
        MomentPair m = uniform_moments(s, d, 0);
        CHECK(b.mean == Catch::Approx(m.mean).margin(1e-12));
        CHECK(b.variance == Catch::Approx(m.variance).margin(1e-12));
    }
}

TEST_CASE("separable selection matches exhaustive binary search per stratum") {
    Rng rng(13, 1);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 2 + static_cast<int>(rng.uniform_int(0, 4));
        std::vector<double> q;
        for (int j = 0; j < n; ++j) q.push_back(static_cast<double>(rng.uniform_int(-5, 9)));
        for (double gamma : {1.3, 2.0, 6.5}) {
            auto cands = stratum_candidates(q, GammaValue(gamma));
            double max_c = -1e300, min_c = 1e300;
            for (const auto& c : cands) {
                max_c = std::max(max_c, c.mean);
                min_c = std::min(min_c, c.mean);
            }
            CHECK(max_c == Catch::Approx(testref::stratum_extreme_mean(q, gamma, true))
                               .margin(1e-12));
            CHECK(min_c == Catch::Approx(testref::stratum_extreme_mean(q, gamma, false))
                               .margin(1e-12));
        }
    }
}

TEST_CASE("separable deviate dominates random binary confounders") {
    Rng rng(17, 3);
    for (int trial = 0; trial < 10; ++trial) {
        MatchedDesign d = random_small_design(rng, 10, 1);
        ScoreMatrix s = testref::sharp_scores(d, StatKind::mean_difference);
        const double gamma = 2.5;
        WorstCaseBound best = separable_worst_case(s, d, 0, GammaValue(gamma), true);
        // maximizing the mean minimizes the deviate; any explicit binary u
        // yields a mean no larger
        for (int draw = 0; draw < 30; ++draw) {
            std::vector<double> u(static_cast<std::size_t>(d.total_individuals()));
            for (auto& v : u) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
            auto [mean, var] =
                testref::moments_at_u(s.columns[0], d.stratum_sizes(), u, gamma);
            CHECK(mean <= best.mean + 1e-10);
            (void)var;
        }
    }
}

TEST_CASE("single-outcome qp at gamma 1 is the closed-form uniform value") {
    MatchedDesign d = testref::pairs_design({{1.0, 0.0}});
    ScoreMatrix s = testref::sharp_scores(d, StatKind::mean_difference);
    s.columns[0] = {1.0, 0.0};
    s.t_obs[0] = 1.0;
    SingleOutcomeResult r = single_outcome_qp(s, d, 0, GammaValue(1.0), 0.05);
    CHECK(r.zeta_star == Catch::Approx(0.25 - 3.841459 * 0.25).margin(1e-6));
    CHECK_FALSE(r.reject);
}

TEST_CASE("qp optimum is never above the separable point's zeta") {
    Rng rng(19, 4);
    for (int trial = 0; trial < 8; ++trial) {
        MatchedDesign d = random_small_design(rng, 8, 1);
        ScoreMatrix s = testref::sharp_scores(d, StatKind::mean_difference);
        for (double gamma : {1.5, 3.0}) {
            SolverConfig config;
            config.random_starts = 4;
            SingleOutcomeResult qp =
                single_outcome_qp(s, d, 0, GammaValue(gamma), 0.05, Alternative::two_sided,
                                  config);
            MinimaxProblem p = make_minimax_problem(s, d, {0}, GammaValue(gamma), 0.05,
                                                    {Alternative::two_sided});
            for (bool maximize : {true, false}) {
                std::vector<double> rho = separable_rho(s, d, 0, GammaValue(gamma), maximize);
                CHECK(qp.zeta_star <= zeta(p, 0, rho) + 1e-9);
            }
        }
    }
}

TEST_CASE("worst-case mean bounds are monotone in gamma") {
    Rng rng(23, 5);
    MatchedDesign d = random_small_design(rng, 10, 1);
    ScoreMatrix s = testref::sharp_scores(d, StatKind::aligned_rank);
    double last_max = -1e300, last_min = 1e300;
    for (double gamma : {1.0, 1.5, 2.0, 4.0, 10.0}) {
        WorstCaseBound up = separable_worst_case(s, d, 0, GammaValue(gamma), true);
        WorstCaseBound down = separable_worst_case(s, d, 0, GammaValue(gamma), false);
        CHECK(up.mean >= last_max - 1e-12);
        CHECK(down.mean <= last_min + 1e-12);
        last_max = up.mean;
        last_min = down.mean;
    }
}

TEST_CASE("worst-case p-value reduces to the plain p-value at gamma 1") {
    Rng rng(29, 6);
    for (int trial = 0; trial < 6; ++trial) {
        MatchedDesign d = random_small_design(rng, 8, 1);
        ScoreMatrix s = testref::sharp_scores(d, StatKind::mean_difference);
        MomentPair m = uniform_moments(s, d, 0);
        double expect = two_sided_pvalue(deviate(s.t_obs[0], m));
        double got = worst_case_pvalue(s, d, 0, GammaValue(1.0), Alternative::two_sided);
        CHECK(got == Catch::Approx(expect).margin(1e-6));
    }
}

TEST_CASE("worst-case p-value grows with gamma and saturates when t is covered") {
    MatchedDesign d = testref::pairs_design({{3.0, 0.0}, {2.5, 0.5}, {2.0, 0.0}});
    ScoreMatrix s = testref::sharp_scores(d, StatKind::mean_difference);
    double last = 0.0;
    for (double gamma : {1.0, 1.5, 2.0, 4.0, 50.0}) {
        double p = worst_case_pvalue(s, d, 0, GammaValue(gamma), Alternative::two_sided);
        CHECK(p >= last - 1e-6);
        last = p;
    }
    CHECK(last > 0.5); // all pairs favor the treated member, so t stays extreme

    // a design with one reversed pair lets the worst-case mean reach t
    MatchedDesign dm = testref::pairs_design({{3.0, 0.0}, {0.0, 2.0}, {2.0, 0.0}});
    ScoreMatrix sm = testref::sharp_scores(dm, StatKind::mean_difference);
    double p = worst_case_pvalue(sm, dm, 0, GammaValue(6.0), Alternative::two_sided);
    CHECK(p == Catch::Approx(1.0));
}
