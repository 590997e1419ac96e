#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "sensi/design.hpp"
#include "sensi/instances.hpp"
#include "sensi/rng.hpp"
#include "support/test_helpers.hpp"

using namespace sensi;

namespace {

struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& content) {
        path = std::string("sensi_test_") + std::to_string(reinterpret_cast<std::uintptr_t>(this)) +
               ".csv";
        std::ofstream out(path);
        out << content;
    }
    ~TempCsv() { std::remove(path.c_str()); }
};

ColumnSchema schema1() {
    ColumnSchema s;
    s.outcome_cols = {"y"};
    return s;
}

} // namespace

TEST_CASE("load_design parses a small two-strata file") {
    TempCsv csv("stratum,treated,y\nA,1,5\nA,0,3\nA2,1,2\nA2,0,2\n");
    MatchedDesign d = load_design(csv.path, schema1());
    CHECK(d.stratum_count() == 2);
    CHECK(d.total_individuals() == 4);
    CHECK(d.outcome_count() == 1);
    CHECK(d.strata[0].treated_index() == 0);
    CHECK(d.strata[0].outcomes[0][0] == 5.0);
    CHECK(d.strata[1].id == "A2");
}

TEST_CASE("load_design rejects bad inputs with an informative message") {
    SECTION("missing column") {
        TempCsv csv("stratum,z,y\nA,1,5\nA,0,3\n");
        CHECK_THROWS_AS(load_design(csv.path, schema1()), input_error);
    }
    SECTION("non-numeric outcome names row and column") {
        TempCsv csv("stratum,treated,y\nA,1,5\nA,0,oops\n");
        try {
            load_design(csv.path, schema1());
            FAIL("expected input_error");
        } catch (const input_error& e) {
            std::string msg = e.what();
            CHECK(msg.find("row 3") != std::string::npos);
            CHECK(msg.find("'y'") != std::string::npos);
        }
    }
    SECTION("empty file") {
        TempCsv csv("");
        CHECK_THROWS_WITH(load_design(csv.path, schema1()),
                          Catch::Matchers::ContainsSubstring("no strata"));
    }
    SECTION("treated flag outside 0/1") {
        TempCsv csv("stratum,treated,y\nA,2,5\nA,0,3\n");
        CHECK_THROWS_AS(load_design(csv.path, schema1()), input_error);
    }
    SECTION("two treated and two controls is mixed-invalid") {
        TempCsv csv("stratum,treated,y\nA,1,5\nA,1,3\nA,0,2\nA,0,1\n");
        CHECK_THROWS_AS(load_design(csv.path, schema1()), input_error);
    }
    SECTION("singleton stratum") {
        TempCsv csv("stratum,treated,y\nA,1,5\nB,1,4\nB,0,3\n");
        CHECK_THROWS_AS(load_design(csv.path, schema1()), input_error);
    }
}

TEST_CASE("one-control strata are canonicalized by flipping") {
    TempCsv csv("stratum,treated,y\nA,1,5\nA,1,4\nA,0,3\n");
    MatchedDesign d = load_design(csv.path, schema1());
    REQUIRE(d.stratum_count() == 1);
    const Stratum& s = d.strata[0];
    CHECK(s.orientation == -1.0);
    CHECK(s.treated_index() == 2); // the former control is the canonical treated
    int treated_total = 0;
    for (auto z : s.treated) treated_total += z;
    CHECK(treated_total == 1);
}

TEST_CASE("canonicalization is idempotent") {
    MatchedDesign d = testref::make_design({{{5}, {4}, {3}}}, {0});
    d.strata[0].treated = {1, 1, 0}; // one control, two treated
    canonicalize(d);
    MatchedDesign once = d;
    canonicalize(d);
    CHECK(d.strata[0].treated == once.strata[0].treated);
    CHECK(d.strata[0].orientation == once.strata[0].orientation);
}

TEST_CASE("apply_hypothesis adjusts treated members only") {
    MatchedDesign d = testref::make_design({{{5.0}, {3.0}}}, {0});

    SECTION("sharp null is the identity") {
        OutcomeMatrix f = apply_hypothesis(d, HypothesisSpec::sharp(1));
        CHECK(f.at(0, 0) == 5.0);
        CHECK(f.at(1, 0) == 3.0);
    }
    SECTION("additive shift subtracts tau from treated values") {
        HypothesisSpec spec;
        spec.outcomes = {{NullKind::additive, 2.0, Alternative::two_sided}};
        OutcomeMatrix f = apply_hypothesis(d, spec);
        CHECK(f.at(0, 0) == 3.0);
        CHECK(f.at(1, 0) == 3.0);
    }
    SECTION("multiplicative effect divides treated values (log-scale shift)") {
        MatchedDesign dm = testref::make_design({{{std::exp(4.0)}, {7.0}}}, {0});
        HypothesisSpec spec;
        spec.outcomes = {{NullKind::multiplicative, std::exp(1.0), Alternative::two_sided}};
        OutcomeMatrix f = apply_hypothesis(dm, spec);
        CHECK(std::log(f.at(0, 0)) == Catch::Approx(3.0).margin(1e-12));
        CHECK(f.at(1, 0) == 7.0);
    }
    SECTION("multiplicative rejects non-positive outcomes") {
        MatchedDesign dm = testref::make_design({{{5.0}, {-1.0}}}, {0});
        HypothesisSpec spec;
        spec.outcomes = {{NullKind::multiplicative, 2.0, Alternative::two_sided}};
        CHECK_THROWS_AS(apply_hypothesis(dm, spec), input_error);
    }
}

TEST_CASE("controls keep their observed values under any hypothesis") {
    Rng rng(11, 0);
    for (int trial = 0; trial < 20; ++trial) {
        MatchedDesign d = random_small_design(rng, 8, 2);
        HypothesisSpec spec;
        for (int k = 0; k < 2; ++k) {
            OutcomeNull n;
            n.kind = trial % 2 ? NullKind::additive : NullKind::sharp;
            n.effect = trial % 2 ? rng.uniform() * 3.0 - 1.5 : 0.0;
            spec.outcomes.push_back(n);
        }
        OutcomeMatrix f = apply_hypothesis(d, spec);
        int row = 0;
        for (const auto& s : d.strata) {
            for (int j = 0; j < s.size(); ++j, ++row) {
                if (s.treated[static_cast<std::size_t>(j)]) continue;
                for (int k = 0; k < 2; ++k)
                    CHECK(f.at(row, k) == s.outcomes[static_cast<std::size_t>(j)]
                                                    [static_cast<std::size_t>(k)]);
            }
        }
    }
}

TEST_CASE("gamma value validation") {
    CHECK_THROWS_AS(GammaValue(0.5), input_error);
    CHECK_THROWS_AS(GammaValue(std::nan("")), input_error);
    CHECK(GammaValue(2.0).log_value == Catch::Approx(std::log(2.0)));
}
