// sensi: sensitivity analysis for matched observational studies with
// multiple outcomes.
//
// Subcommands:
//   analyze       inference + sensitivity analysis on a CSV design
//   simulate      Monte Carlo power / familywise-error studies
//   oracle-check  solver vs brute-force grid agreement on random instances
//
// Exit codes: 0 ok, 1 check failed, 2 input error, 3 solver failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sensi/analysis.hpp"
#include "sensi/design.hpp"
#include "sensi/instances.hpp"
#include "sensi/oracle.hpp"
#include "sensi/report.hpp"
#include "sensi/sha256.hpp"
#include "sensi/simulation.hpp"
#include "sensi/threads.hpp"
#include "sensi/version.hpp"

namespace {

using sensi::json;

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

sensi::StatKind parse_stat(const std::string& s) {
    if (s == "mean-diff") return sensi::StatKind::mean_difference;
    if (s == "aligned-rank") return sensi::StatKind::aligned_rank;
    if (s == "signed-rank") return sensi::StatKind::signed_rank;
    if (s == "huber-m") return sensi::StatKind::huber_m;
    throw sensi::input_error("unknown statistic '" + s + "'");
}

sensi::Alternative parse_alt(const std::string& s) {
    if (s == "two-sided") return sensi::Alternative::two_sided;
    if (s == "greater") return sensi::Alternative::greater;
    if (s == "less") return sensi::Alternative::less;
    throw sensi::input_error("unknown alternative '" + s + "'");
}

sensi::OutcomeNull parse_null(const std::string& s) {
    sensi::OutcomeNull n;
    if (s == "sharp") {
        n.kind = sensi::NullKind::sharp;
    } else if (s.rfind("additive:", 0) == 0) {
        n.kind = sensi::NullKind::additive;
        n.effect = std::stod(s.substr(9));
    } else if (s.rfind("multiplicative:", 0) == 0) {
        n.kind = sensi::NullKind::multiplicative;
        n.effect = std::stod(s.substr(15));
    } else {
        throw sensi::input_error("unknown null spec '" + s +
                                 "' (sharp | additive:TAU | multiplicative:BETA)");
    }
    return n;
}

std::vector<double> parse_gamma_grid(const std::string& spec) {
    // lo:hi:step
    std::vector<double> parts;
    std::string item;
    std::stringstream ss(spec);
    while (std::getline(ss, item, ':')) parts.push_back(std::stod(item));
    if (parts.size() != 3 || parts[2] <= 0.0 || parts[1] < parts[0])
        throw sensi::input_error("gamma grid must be lo:hi:step, e.g. 1:2:0.25");
    std::vector<double> grid;
    for (double g = parts[0]; g <= parts[1] + 1e-12; g += parts[2]) grid.push_back(g);
    return grid;
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw sensi::input_error("cannot write '" + out_path + "'");
        out << text << "\n";
    }
}

int cmd_analyze(const std::string& csv_path, const sensi::ColumnSchema& schema,
                const std::string& stat, const std::string& alt_spec,
                const std::string& null_spec, double alpha, double gamma_single,
                const std::string& grid_spec, bool gamma_search, const std::string& methods,
                double huber_trunc, std::uint64_t seed, int starts, int threads,
                const std::string& out_path) {
    sensi::MatchedDesign design = sensi::load_design(csv_path, schema);
    const int k_count = design.outcome_count();

    auto broadcast = [&](const std::string& spec, const char* what) {
        auto items = split_commas(spec);
        if (items.size() == 1) items.assign(static_cast<std::size_t>(k_count), items[0]);
        if (static_cast<int>(items.size()) != k_count)
            throw sensi::input_error(std::string(what) + " needs 1 or " +
                                     std::to_string(k_count) + " entries");
        return items;
    };

    sensi::HypothesisSpec hypothesis;
    std::vector<sensi::Alternative> alternatives;
    for (const auto& item : broadcast(null_spec, "--null")) hypothesis.outcomes.push_back(parse_null(item));
    for (const auto& item : broadcast(alt_spec, "--alt")) alternatives.push_back(parse_alt(item));
    for (int k = 0; k < k_count; ++k)
        hypothesis.outcomes[static_cast<std::size_t>(k)].alternative =
            alternatives[static_cast<std::size_t>(k)];

    sensi::OutcomeMatrix f = sensi::apply_hypothesis(design, hypothesis);
    std::vector<sensi::StatKind> kinds;
    for (const auto& item : broadcast(stat, "--stat")) kinds.push_back(parse_stat(item));
    sensi::ScoreOptions sopt;
    sopt.huber_trunc = huber_trunc;
    sensi::ScoreMatrix scores = sensi::build_scores(f, design, kinds, sopt);

    sensi::AnalysisOptions options;
    options.alpha = alpha;
    options.gamma_search = gamma_search;
    if (!grid_spec.empty())
        options.gamma_grid = parse_gamma_grid(grid_spec);
    else if (gamma_single > 0.0)
        options.gamma_grid = {gamma_single};
    options.solver.seed = seed;
    options.solver.random_starts = starts;
    options.solver.threads = sensi::resolve_threads(threads);
    auto method_list = split_commas(methods);
    auto has = [&](const std::string& m) {
        for (const auto& x : method_list)
            if (x == m || x == "all") return true;
        return false;
    };
    options.run_separate = has("separate");
    options.run_minimax = has("minimax");
    options.run_closed = has("closed") && k_count <= 12;

    sensi::AnalysisResult analysis = sensi::run_analysis(design, scores, alternatives, options);

    json config{{"csv", csv_path},
                {"stratum_col", schema.stratum_col},
                {"treated_col", schema.treated_col},
                {"outcomes", schema.outcome_cols},
                {"stat", stat},
                {"alt", alt_spec},
                {"null", null_spec},
                {"alpha", alpha},
                {"gamma_grid", options.gamma_grid},
                {"gamma_search", gamma_search},
                {"methods", methods},
                {"huber_trunc", huber_trunc},
                {"threads", options.solver.threads},
                {"solver",
                 json{{"random_starts", options.solver.random_starts},
                      {"seed", options.solver.seed},
                      {"separable_starts", options.solver.separable_starts},
                      {"temperature_schedule", options.solver.temperature_schedule},
                      {"iterations_per_temperature", options.solver.iterations_per_temperature},
                      {"iteration_cap", options.solver.iteration_cap},
                      {"improvement_tol", options.solver.improvement_tol},
                      {"stall_window", options.solver.stall_window},
                      {"polish_passes", options.solver.polish_passes}}}};
    json report{{"tool", json{{"name", "sensi"}, {"version", sensi::kVersion}}},
                {"input", json{{"path", csv_path}, {"sha256", sensi::sha256_file(csv_path)}}},
                {"config", config},
                {"design", sensi::design_summary_json(design)},
                {"randomization", sensi::baselines_json(analysis.baselines)},
                {"gamma_grid", sensi::decisions_json(analysis.decisions,
                                                     design.total_individuals() <= 64)},
                {"changepoints", sensi::changepoints_json(analysis.changepoints)},
                {"notes", analysis.notes}};
    write_output(report.dump(2), out_path);
    return analysis.solver_converged ? 0 : 3;
}

int cmd_simulate(const std::string& preset, const std::string& scenario_path, int reps,
                 std::uint64_t seed, const std::string& gammas, int pairs, double alpha,
                 int threads, const std::string& format, const std::string& out_path) {
    sensi::SimulationScenario scenario;
    if (!preset.empty())
        scenario = sensi::scenario_preset(preset);
    else if (!scenario_path.empty())
        scenario = sensi::load_scenario(scenario_path);
    else
        throw sensi::input_error("simulate needs --preset or --scenario");
    if (reps > 0) scenario.replications = reps;
    if (seed != 0) scenario.seed = seed;
    if (pairs > 0) scenario.pairs = pairs;
    if (alpha > 0.0) scenario.alpha = alpha;
    if (!gammas.empty()) {
        scenario.gammas.clear();
        for (const auto& g : split_commas(gammas)) scenario.gammas.push_back(std::stod(g));
    }
    scenario.threads = threads;

    sensi::PowerReport report = sensi::run_power_study(scenario);
    if (format == "csv")
        write_output(sensi::power_report_csv(report), out_path);
    else
        write_output(sensi::power_report_json(report).dump(2), out_path);
    return 0;
}

int cmd_oracle_check(int instances, int n_max, int k_max, std::uint64_t seed,
                     const std::string& gammas, double tol, int threads) {
    std::vector<double> gamma_values = {1.0, 1.5, 2.0, 5.0, 10.0};
    if (!gammas.empty()) {
        gamma_values.clear();
        for (const auto& g : split_commas(gammas)) gamma_values.push_back(std::stod(g));
    }
    if (n_max > 8) throw sensi::input_error("--n-max is capped at 8 (grid oracle)");
    if (instances == 0) {
        std::cout << "oracle-check: 0 instances requested, vacuous pass\n";
        return 0;
    }

    struct Case {
        sensi::MatchedDesign design;
        bool opposed = false;
    };
    std::vector<Case> cases;
    for (int i = 0; i < instances; ++i) {
        sensi::Rng rng(seed, static_cast<std::uint64_t>(i));
        Case c;
        if (i % 5 == 4) { // adversarial opposed-outcome family included by default
            c.design = sensi::opposed_outcome_pairs(rng, 1 + static_cast<int>(rng.uniform_int(0, 1)));
            c.opposed = true;
        } else {
            c.design = sensi::random_small_design(rng, n_max, 1 + static_cast<int>(rng.uniform_int(0, k_max - 1)));
        }
        cases.push_back(std::move(c));
    }

    struct Outcome {
        double worst_gap = 0.0;
        int checks = 0;
        bool failed = false;
        std::string note;
    };
    std::vector<Outcome> outcomes(cases.size());
    sensi::parallel_for(cases.size(), sensi::resolve_threads(threads), [&](std::size_t i) {
        auto& out = outcomes[i];
        try {
            const auto& design = cases[i].design;
            sensi::HypothesisSpec spec = sensi::HypothesisSpec::sharp(design.outcome_count());
            sensi::OutcomeMatrix f = sensi::apply_hypothesis(design, spec);
            std::vector<sensi::StatKind> kinds(
                static_cast<std::size_t>(design.outcome_count()),
                sensi::StatKind::mean_difference);
            sensi::ScoreMatrix scores = sensi::build_scores(f, design, kinds);
            std::vector<sensi::Alternative> alts(
                static_cast<std::size_t>(design.outcome_count()),
                sensi::Alternative::two_sided);
            std::vector<int> subset;
            for (int k = 0; k < design.outcome_count(); ++k) subset.push_back(k);
            for (double g : gamma_values) {
                sensi::MinimaxProblem problem = sensi::make_minimax_problem(
                    scores, design, subset, sensi::GammaValue(g), 0.05, alts);
                sensi::SolverConfig config;
                config.threads = 1;
                sensi::MinimaxSolution sol = sensi::solve_minimax(problem, config);
                sensi::oracle::OracleResult check = sensi::oracle::grid_minimax(problem);
                double scale = std::max({1.0, std::fabs(sol.y), std::fabs(check.value)});
                double gap = std::fabs(sol.y - check.value) / scale;
                out.worst_gap = std::max(out.worst_gap, gap);
                ++out.checks;
            }
        } catch (const std::exception& e) {
            out.failed = true;
            out.note = e.what();
        }
    });

    double worst = 0.0;
    int checks = 0;
    int failures = 0;
    for (const auto& o : outcomes) {
        worst = std::max(worst, o.worst_gap);
        checks += o.checks;
        if (o.failed || o.worst_gap > tol) {
            ++failures;
            if (!o.note.empty()) std::cerr << "oracle-check: " << o.note << "\n";
        }
    }
    std::cout << "oracle-check: " << cases.size() << " instances, " << checks
              << " solver/oracle comparisons, worst relative gap " << worst << "\n";
    if (failures > 0) {
        std::cout << "FAIL: " << failures << " instances exceeded tolerance " << tol << "\n";
        return 1;
    }
    std::cout << "PASS: all gaps within " << tol << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sensitivity analysis for matched observational studies with multiple outcomes"};
    app.set_version_flag("--version", sensi::kVersion);
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "analyze a CSV design");
    std::string csv_path, outcomes_spec, out_path;
    sensi::ColumnSchema schema;
    std::string stat = "aligned-rank", alt_spec = "two-sided", null_spec = "sharp";
    std::string grid_spec, methods = "all";
    double alpha = 0.05, gamma_single = -1.0, huber_trunc = 2.5;
    bool gamma_search = false;
    std::uint64_t seed = 987654321;
    int starts = 16, threads = 0;
    analyze->add_option("csv", csv_path, "input CSV")->required();
    analyze->add_option("--stratum-col", schema.stratum_col, "stratum id column");
    analyze->add_option("--treated-col", schema.treated_col, "treatment indicator column");
    analyze->add_option("--outcomes", outcomes_spec, "comma-separated outcome columns")->required();
    analyze->add_option("--stat", stat, "mean-diff|aligned-rank|signed-rank|huber-m (1 or K)");
    analyze->add_option("--alt", alt_spec, "two-sided|greater|less (1 or K)");
    analyze->add_option("--null", null_spec, "sharp|additive:TAU|multiplicative:BETA (1 or K)");
    analyze->add_option("--alpha", alpha, "familywise level");
    analyze->add_option("--gamma", gamma_single, "single Gamma value");
    analyze->add_option("--gamma-grid", grid_spec, "Gamma grid lo:hi:step (default 1:2:0.25)");
    analyze->add_flag("--gamma-search", gamma_search, "bisect for the changepoint Gamma*");
    analyze->add_option("--method", methods, "separate,minimax,closed or all");
    analyze->add_option("--huber-trunc", huber_trunc, "psi truncation constant");
    analyze->add_option("--seed", seed, "solver seed");
    analyze->add_option("--starts", starts, "random multistarts");
    analyze->add_option("--threads", threads, "worker threads (0 = auto, env SENSI_THREADS)");
    analyze->add_option("--out", out_path, "write the JSON report here instead of stdout");

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo power study");
    std::string preset, scenario_path, sim_gammas, format = "json", sim_out;
    int reps = 0, sim_pairs = 0, sim_threads = 0;
    std::uint64_t sim_seed = 0;
    double sim_alpha = -1.0;
    simulate->add_option("--preset", preset,
                         "table1-tT-sS | table2-tT-sS (T=1..4, S=1,2) | appc-s1 | appc-s2");
    simulate->add_option("--scenario", scenario_path, "scenario file (key = value lines)");
    simulate->add_option("--reps", reps, "replications");
    simulate->add_option("--seed", sim_seed, "stream seed");
    simulate->add_option("--gammas", sim_gammas, "comma-separated Gamma values");
    simulate->add_option("--pairs", sim_pairs, "pair count override");
    simulate->add_option("--alpha", sim_alpha, "level override");
    simulate->add_option("--threads", sim_threads, "worker threads (0 = auto)");
    simulate->add_option("--format", format, "json|csv");
    simulate->add_option("--out", sim_out, "output path");

    // oracle-check
    auto* oracle_check = app.add_subcommand("oracle-check", "solver vs grid oracle");
    int instances = 100, n_max = 8, k_max = 3, oc_threads = 0;
    std::uint64_t oc_seed = 20240501;
    std::string oc_gammas;
    double tol = 1e-4;
    oracle_check->add_option("--instances", instances, "number of random instances");
    oracle_check->add_option("--n-max", n_max, "max individuals per instance (<= 8)");
    oracle_check->add_option("--k-max", k_max, "max outcomes per instance (<= 3)");
    oracle_check->add_option("--seed", oc_seed, "instance seed");
    oracle_check->add_option("--gammas", oc_gammas, "comma-separated Gamma values");
    oracle_check->add_option("--tol", tol, "maximum allowed relative gap");
    oracle_check->add_option("--threads", oc_threads, "worker threads (0 = auto)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            schema.outcome_cols = split_commas(outcomes_spec);
            if (grid_spec.empty() && gamma_single <= 0.0 && !gamma_search)
                grid_spec = "1:2:0.25";
            return cmd_analyze(csv_path, schema, stat, alt_spec, null_spec, alpha, gamma_single,
                               grid_spec, gamma_search, methods, huber_trunc, seed, starts,
                               threads, out_path);
        }
        if (*simulate)
            return cmd_simulate(preset, scenario_path, reps, sim_seed, sim_gammas, sim_pairs,
                                sim_alpha, sim_threads, format, sim_out);
        if (*oracle_check)
            return cmd_oracle_check(instances, n_max, k_max, oc_seed, oc_gammas, tol, oc_threads);
    } catch (const sensi::solver_error& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const sensi::input_error& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
