#pragma once

// JSON report assembly. Field names are frozen in docs/report-schema.md;
// every report embeds the tool version, the input hash, the seed and a config
// echo so results can be reproduced exactly.

#include <string>
#include <vector>

#include <json.hpp>

#include "sensi/analysis.hpp"
#include "sensi/design.hpp"
#include "sensi/simulation.hpp"
#include "sensi/version.hpp"

namespace sensi {

using json = nlohmann::ordered_json;

inline const char* alternative_name(Alternative a) {
    switch (a) {
        case Alternative::two_sided: return "two-sided";
        case Alternative::greater: return "greater";
        case Alternative::less: return "less";
    }
    return "?";
}

inline json design_summary_json(const MatchedDesign& design) {
    json sizes = json::array();
    for (const auto& s : design.strata) sizes.push_back(s.size());
    int flipped = 0;
    for (const auto& s : design.strata)
        if (s.orientation < 0) ++flipped;
    return json{{"strata", design.stratum_count()},
                {"individuals", design.total_individuals()},
                {"outcomes", design.outcome_names},
                {"stratum_sizes", sizes},
                {"flipped_strata", flipped}};
}

inline json baselines_json(const std::vector<OutcomeBaseline>& baselines) {
    json arr = json::array();
    for (const auto& b : baselines) {
        json j{{"outcome", b.name},
               {"statistic", stat_name(b.stat)},
               {"alternative", alternative_name(b.alternative)},
               {"t_obs", b.t_obs},
               {"mean", b.mean},
               {"variance", b.variance},
               {"deviate", b.deviate},
               {"p_two_sided", b.p_two_sided},
               {"p_greater", b.p_greater},
               {"p_less", b.p_less}};
        if (b.exact_available) {
            j["exact"] = json{{"p_greater_equal", b.exact_p_greater_equal},
                              {"assignments", b.assignments}};
        } else {
            j["exact"] = nullptr;
        }
        arr.push_back(std::move(j));
    }
    return arr;
}

inline json decisions_json(const std::vector<GammaDecision>& decisions, bool include_u) {
    json arr = json::array();
    for (const auto& d : decisions) {
        json j{{"gamma", d.gamma}};
        if (!d.worst_case_pvalues.empty()) {
            json holm = json::array();
            for (bool r : d.holm.reject) holm.push_back(r);
            j["separate"] = json{{"worst_case_pvalues", d.worst_case_pvalues},
                                 {"single_zeta", d.single_zeta},
                                 {"holm_reject", holm},
                                 {"overall_reject", d.separate_overall}};
        }
        j["minimax"] = json{{"y", d.minimax_y},
                            {"reject", d.minimax_reject},
                            {"zeta", d.minimax_zetas},
                            {"certificate", d.certificate}};
        if (!std::isnan(d.certified_gap)) j["minimax"]["certified_gap"] = d.certified_gap;
        if (include_u) j["minimax"]["u_star"] = d.u_star;
        if (d.closed_ran) {
            json closed = json::array();
            for (bool r : d.closed_reject) closed.push_back(r);
            j["closed_testing"] = json{{"reject", closed}};
        }
        arr.push_back(std::move(j));
    }
    return arr;
}

inline json changepoints_json(const std::vector<GammaChangepoint>& cps) {
    json arr = json::array();
    for (const auto& c : cps) {
        arr.push_back(json{{"method", c.method},
                           {"gamma_star", c.gamma_star},
                           {"bracket", c.bracket},
                           {"rejects_at_gamma_one", c.rejects_at_one},
                           {"hit_cap", c.hit_cap},
                           {"anomaly", c.anomaly}});
    }
    return arr;
}

inline json power_report_json(const PowerReport& report) {
    const auto& sc = report.scenario;
    json scenario{{"name", sc.name},
                  {"pairs", sc.pairs},
                  {"outcomes", sc.outcomes()},
                  {"tau", sc.tau},
                  {"sigma", sc.sigma},
                  {"alpha", sc.alpha},
                  {"statistic", stat_name(sc.stat)},
                  {"huber_trunc", sc.huber_trunc},
                  {"replications", sc.replications},
                  {"seed", sc.seed}};
    json rows = json::array();
    for (const auto& r : report.rows) {
        json row{{"gamma", r.gamma}, {"replications_effective", r.reps}};
        auto rate_pair = [&](long c) {
            return json{{"rate", PowerReport::rate(c, r.reps)},
                        {"mc_se", PowerReport::mc_se(c, r.reps)}};
        };
        row["separate_overall"] = rate_pair(r.separate_overall);
        row["minimax_overall"] = rate_pair(r.minimax_overall);
        if (!r.closed_outcome.empty() &&
            sc.has(Method::closed_testing)) {
            row["closed_overall"] = rate_pair(r.closed_overall);
            json holm = json::array(), closed = json::array();
            for (long c : r.holm_outcome) holm.push_back(rate_pair(c));
            for (long c : r.closed_outcome) closed.push_back(rate_pair(c));
            row["holm_outcome"] = holm;
            row["closed_outcome"] = closed;
            json claims = json::array();
            for (std::size_t m = 0; m < r.closed_claim.size(); ++m) {
                json members = json::array();
                for (int k = 0; k < sc.outcomes(); ++k)
                    if ((m + 1) & (1u << k)) members.push_back(k + 1);
                claims.push_back(json{{"outcomes", members},
                                      {"rate", PowerReport::rate(r.closed_claim[m], r.reps)}});
            }
            row["closed_claims"] = claims;
        }
        row["dominance_violations"] = r.dominance_violations;
        row["ordering_violations"] = r.ordering_violations;
        rows.push_back(std::move(row));
    }
    return json{{"tool", json{{"name", "sensi"}, {"version", kVersion}}},
                {"scenario", scenario},
                {"rows", rows},
                {"solver_failures", report.solver_failures},
                {"power_monotone_in_gamma", report.power_monotone_in_gamma},
                {"notes", report.notes}};
}

inline std::string power_report_csv(const PowerReport& report) {
    std::string out = "gamma,method,target,rate,mc_se\n";
    auto add = [&](double gamma, const std::string& method, const std::string& target, long c,
                   long reps) {
        out += std::to_string(gamma) + "," + method + "," + target + "," +
               std::to_string(PowerReport::rate(c, reps)) + "," +
               std::to_string(PowerReport::mc_se(c, reps)) + "\n";
    };
    for (const auto& r : report.rows) {
        add(r.gamma, "separate", "overall", r.separate_overall, r.reps);
        add(r.gamma, "minimax", "overall", r.minimax_overall, r.reps);
        if (report.scenario.has(Method::closed_testing)) {
            add(r.gamma, "closed-testing", "overall", r.closed_overall, r.reps);
            for (std::size_t k = 0; k < r.holm_outcome.size(); ++k) {
                add(r.gamma, "separate", "H" + std::to_string(k + 1), r.holm_outcome[k], r.reps);
                add(r.gamma, "closed-testing", "H" + std::to_string(k + 1), r.closed_outcome[k],
                    r.reps);
            }
        }
    }
    return out;
}

} // namespace sensi
