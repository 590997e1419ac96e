#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "sensi/instances.hpp"
#include "sensi/rng.hpp"
#include "sensi/stats.hpp"
#include "support/test_helpers.hpp"

using namespace sensi;

TEST_CASE("mean-difference scores match the displayed formula") {
    SECTION("single pair") {
        MatchedDesign d = testref::pairs_design({{4.0, 1.0}});
        ScoreMatrix s = testref::sharp_scores(d, StatKind::mean_difference);
        CHECK(s.columns[0][0] == Catch::Approx(3.0));
        CHECK(s.columns[0][1] == Catch::Approx(-3.0));
        CHECK(s.t_obs[0] == Catch::Approx(3.0)); // member 1 treated
    }
    SECTION("two pairs divide by I") {
        MatchedDesign d = testref::pairs_design({{4.0, 1.0}, {2.0, 2.0}});
        ScoreMatrix s = testref::sharp_scores(d, StatKind::mean_difference);
        CHECK(s.columns[0][0] == Catch::Approx(1.5));
        CHECK(s.columns[0][1] == Catch::Approx(-1.5));
        CHECK(s.columns[0][2] == Catch::Approx(0.0));
        CHECK(s.columns[0][3] == Catch::Approx(0.0));
    }
    SECTION("triple stratum") {
        MatchedDesign d = testref::make_design({{{6.0}, {0.0}, {3.0}}}, {0});
        ScoreMatrix s = testref::sharp_scores(d, StatKind::mean_difference);
        CHECK(s.columns[0][0] == Catch::Approx(4.5)); // ((6-0)+(6-3))/(1*2)
    }
}

TEST_CASE("aligned ranks use midranks over all N aligned responses") {
    SECTION("two pairs") {
        // aligned values [1.5, -1.5, 0, 0] -> ranks [4, 1, 2.5, 2.5]
        MatchedDesign d = testref::pairs_design({{4.0, 1.0}, {2.0, 2.0}});
        ScoreMatrix s = testref::sharp_scores(d, StatKind::aligned_rank);
        CHECK(s.columns[0][0] == Catch::Approx(4.0));
        CHECK(s.columns[0][1] == Catch::Approx(1.0));
        CHECK(s.columns[0][2] == Catch::Approx(2.5));
        CHECK(s.columns[0][3] == Catch::Approx(2.5));
    }
    SECTION("total tie gives (N+1)/2 everywhere") {
        MatchedDesign d = testref::pairs_design({{1.0, 1.0}, {5.0, 5.0}});
        ScoreMatrix s = testref::sharp_scores(d, StatKind::aligned_rank);
        for (double v : s.columns[0]) CHECK(v == Catch::Approx(2.5));
    }
    SECTION("ranks sum to N(N+1)/2 on random designs") {
        Rng rng(3, 0);
        for (int trial = 0; trial < 25; ++trial) {
            MatchedDesign d = random_small_design(rng, 12, 1);
            ScoreMatrix s = testref::sharp_scores(d, StatKind::aligned_rank);
            double n = d.total_individuals();
            double sum = 0.0;
            for (std::size_t i = 0; i < s.columns[0].size(); ++i) {
                double orient = 1.0;
                // undo orientation before summing (flip only changes sign)
                sum += std::fabs(s.columns[0][i]) * orient;
            }
            CHECK(sum == Catch::Approx(n * (n + 1) / 2.0));
        }
    }
}

TEST_CASE("signed rank scores follow the pair formula") {
    SECTION("distinct absolute differences") {
        // |diffs| [3, 1]: d = [2, 1]; pair 1 F=[5,2] -> q1 = [2, 0]
        MatchedDesign d = testref::pairs_design({{5.0, 2.0}, {1.0, 2.0}});
        ScoreMatrix s = testref::sharp_scores(d, StatKind::signed_rank);
        CHECK(s.columns[0][0] == Catch::Approx(2.0));
        CHECK(s.columns[0][1] == Catch::Approx(0.0));
        CHECK(s.columns[0][2] == Catch::Approx(0.0));
        CHECK(s.columns[0][3] == Catch::Approx(1.0)); // member 2 larger in pair 2
    }
    SECTION("tied absolute differences get midranks") {
        MatchedDesign d = testref::pairs_design({{3.0, 1.0}, {0.0, 2.0}});
        ScoreMatrix s = testref::sharp_scores(d, StatKind::signed_rank);
        CHECK(s.columns[0][0] == Catch::Approx(1.5));
        CHECK(s.columns[0][3] == Catch::Approx(1.5));
    }
    SECTION("zero differences score zero for both members") {
        MatchedDesign d = testref::pairs_design({{2.0, 2.0}, {4.0, 1.0}});
        ScoreMatrix s = testref::sharp_scores(d, StatKind::signed_rank);
        CHECK(s.columns[0][0] == 0.0);
        CHECK(s.columns[0][1] == 0.0);
        CHECK(s.columns[0][2] == Catch::Approx(1.0)); // ranked among nonzero only
    }
    SECTION("non-pair stratum is rejected") {
        MatchedDesign d = testref::make_design({{{6.0}, {0.0}, {3.0}}}, {0});
        CHECK_THROWS_AS(testref::sharp_scores(d, StatKind::signed_rank), input_error);
    }
}

TEST_CASE("huber psi and huber-m scores") {
    CHECK(huber_psi(4.0) == 2.5);
    CHECK(huber_psi(-1.0) == -1.0);
    CHECK(huber_psi(0.0) == 0.0);
    CHECK(huber_psi(-7.0) == -2.5);

    SECTION("pair scores are odd in the member order") {
        MatchedDesign d =
            testref::pairs_design({{5.0, 1.0}, {0.0, 2.0}, {3.0, 2.0}, {9.0, 1.0}});
        ScoreMatrix s = testref::sharp_scores(d, StatKind::huber_m);
        for (int i = 0; i < 4; ++i)
            CHECK(s.columns[0][static_cast<std::size_t>(2 * i)] ==
                  Catch::Approx(-s.columns[0][static_cast<std::size_t>(2 * i + 1)]));
        // diffs [4, -2, 1, 8], scale = median |D| = 3 -> psi(4/3), psi(-2/3)...
        CHECK(s.columns[0][0] == Catch::Approx(4.0 / 3.0));
        CHECK(s.columns[0][2] == Catch::Approx(-2.0 / 3.0));
        CHECK(s.columns[0][6] == Catch::Approx(2.5)); // 8/3 truncated
    }
    SECTION("zero scale is an error") {
        MatchedDesign d = testref::pairs_design({{1.0, 1.0}, {2.0, 2.0}, {4.0, 1.0}});
        CHECK_THROWS_AS(testref::sharp_scores(d, StatKind::huber_m), input_error);
    }
}

TEST_CASE("t_obs always equals the sum of treated scores") {
    Rng rng(17, 0);
    for (int trial = 0; trial < 30; ++trial) {
        MatchedDesign d = random_small_design(rng, 10, 2);
        for (StatKind kind : {StatKind::mean_difference, StatKind::aligned_rank}) {
            ScoreMatrix s = testref::sharp_scores(d, kind);
            for (int k = 0; k < 2; ++k) {
                double t = 0.0;
                int row = 0;
                for (const auto& st : d.strata) {
                    for (int j = 0; j < st.size(); ++j, ++row)
                        if (st.treated[static_cast<std::size_t>(j)])
                            t += s.columns[static_cast<std::size_t>(k)]
                                          [static_cast<std::size_t>(row)];
                }
                CHECK(s.t_obs[static_cast<std::size_t>(k)] == Catch::Approx(t).margin(1e-12));
            }
        }
    }
}

TEST_CASE("flipped strata negate their score block consistently") {
    MatchedDesign d = testref::make_design({{{6.0}, {0.0}, {3.0}}}, {0});
    d.strata[0].treated = {1, 1, 0}; // one control: flips
    canonicalize(d);
    REQUIRE(d.strata[0].orientation == -1.0);
    ScoreMatrix s = testref::sharp_scores(d, StatKind::mean_difference);
    // raw scores 4.5, -4.5, 0 negated by the flip
    CHECK(s.columns[0][0] == Catch::Approx(-4.5));
    CHECK(s.columns[0][1] == Catch::Approx(4.5));
    CHECK(s.columns[0][2] == Catch::Approx(-0.0).margin(1e-15));
    CHECK(s.t_obs[0] == Catch::Approx(-0.0).margin(1e-15)); // canonical treated = member 3
}
