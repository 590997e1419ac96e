#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sensi/simulation.hpp"

using namespace sensi;

namespace {

SimulationScenario small_scenario() {
    SimulationScenario s;
    s.pairs = 40;
    s.tau = {0.4, 0.0};
    s.sigma = identity_covariance(2);
    s.gammas = {1.0, 1.2};
    s.replications = 60;
    s.seed = 99;
    s.threads = 2;
    s.methods = {Method::separate, Method::minimax, Method::closed_testing};
    return s;
}

} // namespace

TEST_CASE("paired differences are deterministic and distributionally sane") {
    SimulationScenario s = small_scenario();
    s.pairs = 400;
    auto a = generate_paired_differences(s, 3);
    auto b = generate_paired_differences(s, 3);
    CHECK(a == b); // same seed, same replicate -> identical matrix
    auto c = generate_paired_differences(s, 4);
    CHECK(a != c);

    // mean near tau
    double mean0 = 0.0;
    for (const auto& row : a) mean0 += row[0];
    mean0 /= s.pairs;
    CHECK(mean0 == Catch::Approx(0.4).margin(4.0 / std::sqrt(s.pairs)));
}

TEST_CASE("exchangeable covariance reproduces the target correlation") {
    SimulationScenario s;
    s.pairs = 4000;
    s.tau = {0.0, 0.0};
    s.sigma = exchangeable_covariance(2, 0.5);
    s.replications = 1;
    s.seed = 7;
    auto d = generate_paired_differences(s, 0);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (const auto& row : d) {
        sx += row[0];
        sy += row[1];
        sxx += row[0] * row[0];
        syy += row[1] * row[1];
        sxy += row[0] * row[1];
    }
    double n = s.pairs;
    double corr = (sxy - sx * sy / n) /
                  std::sqrt((sxx - sx * sx / n) * (syy - sy * sy / n));
    CHECK(corr == Catch::Approx(0.5).margin(0.05));
}

TEST_CASE("non positive definite covariance is rejected") {
    SimulationScenario s;
    s.pairs = 10;
    s.tau = {0.0, 0.0};
    s.sigma = {{1.0, 2.0}, {2.0, 1.0}}; // correlation 2: not PD
    s.replications = 1;
    CHECK_THROWS_AS(generate_paired_differences(s, 0), input_error);
}

TEST_CASE("pairs design reproduces the differences") {
    std::vector<std::vector<double>> d = {{1.5, -0.5}, {0.0, 2.0}};
    MatchedDesign design = pairs_design_from_differences(d);
    REQUIRE(design.stratum_count() == 2);
    CHECK(design.all_pairs());
    CHECK(design.strata[0].outcomes[0][0] - design.strata[0].outcomes[1][0] == 1.5);
    CHECK(design.strata[1].outcomes[0][1] - design.strata[1].outcomes[1][1] == 2.0);
    CHECK(design.strata[0].treated_index() == 0);
}

TEST_CASE("power study runs with zero violations and monotone power") {
    SimulationScenario s = small_scenario();
    PowerReport report = run_power_study(s);
    REQUIRE(report.rows.size() == 2);
    CHECK(report.solver_failures == 0);
    for (const auto& row : report.rows) {
        CHECK(row.dominance_violations == 0);
        CHECK(row.ordering_violations == 0);
        CHECK(row.reps == s.replications);
        // separate never beats minimax in the aggregate either
        CHECK(row.minimax_overall >= row.separate_overall);
        // closed testing per outcome at least Holm per outcome
        for (std::size_t k = 0; k < row.holm_outcome.size(); ++k)
            CHECK(row.closed_outcome[k] >= row.holm_outcome[k]);
    }
    CHECK(report.power_monotone_in_gamma);
    // outcome 1 carries a real effect: it should be rejected often at gamma 1
    CHECK(PowerReport::rate(report.rows[0].closed_outcome[0], report.rows[0].reps) > 0.5);
}

TEST_CASE("power study is reproducible for a fixed seed") {
    SimulationScenario s = small_scenario();
    s.replications = 25;
    PowerReport a = run_power_study(s);
    s.threads = 1;
    PowerReport b = run_power_study(s); // thread count must not matter
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t g = 0; g < a.rows.size(); ++g) {
        CHECK(a.rows[g].separate_overall == b.rows[g].separate_overall);
        CHECK(a.rows[g].minimax_overall == b.rows[g].minimax_overall);
        CHECK(a.rows[g].closed_outcome == b.rows[g].closed_outcome);
        CHECK(a.rows[g].closed_claim == b.rows[g].closed_claim);
    }
}

TEST_CASE("degenerate single-replication report") {
    SimulationScenario s = small_scenario();
    s.replications = 1;
    s.methods = {Method::separate, Method::minimax};
    PowerReport report = run_power_study(s);
    CHECK(report.rows[0].reps == 1);
    CHECK(PowerReport::mc_se(report.rows[0].minimax_overall, 1) == 0.0);
}

TEST_CASE("scenario presets cover the documented grid") {
    SimulationScenario t1 = scenario_preset("table1-t2-s1");
    CHECK(t1.tau == std::vector<double>{0.25, 0.25, 0.25, 0.25, 0.0});
    CHECK(t1.sigma[0][1] == 0.0);
    SimulationScenario t1b = scenario_preset("table1-t1-s2");
    CHECK(t1b.sigma[0][1] == 0.5);
    SimulationScenario t2 = scenario_preset("table2-t2-s2");
    CHECK(t2.tau == std::vector<double>{0.25, 0.3, 0.35});
    SimulationScenario ac = scenario_preset("appc-s1");
    CHECK(ac.tau == std::vector<double>{0.0, 0.0, 0.3});
    CHECK_THROWS_AS(scenario_preset("table1-t9-s1"), input_error);
}

TEST_CASE("scenario file grammar") {
    SimulationScenario s = parse_scenario_text(
        "# demo scenario\n"
        "name = demo\n"
        "pairs = 60\n"
        "tau = 0.2, 0.3\n"
        "sigma = exchangeable 0.5\n"
        "gammas = 1.0, 1.25\n"
        "alpha = 0.05\n"
        "stat = huber-m\n"
        "reps = 10\n"
        "seed = 5\n"
        "methods = separate, minimax\n");
    CHECK(s.name == "demo");
    CHECK(s.pairs == 60);
    CHECK(s.tau.size() == 2);
    CHECK(s.sigma[0][1] == 0.5);
    CHECK(s.replications == 10);
    CHECK_THROWS_AS(parse_scenario_text("pairs = 10\n"), input_error); // tau required
    CHECK_THROWS_AS(parse_scenario_text("tau = 1\nbogus = 3\n"), input_error);
}
