#pragma once

// Matched-design data model: strata of one treated + controls, K outcomes per
// member, hypothesis adjustment. Immutable after construction and safe to
// share across threads.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sensi/csv.hpp"
#include "sensi/error.hpp"

namespace sensi {

struct GammaValue {
    double value;     // Gamma >= 1, odds-ratio bound on within-stratum assignment
    double log_value; // log(Gamma)

    explicit GammaValue(double gamma) : value(gamma), log_value(std::log(gamma)) {
        if (!(gamma >= 1.0) || !std::isfinite(gamma))
            throw input_error("sensitivity parameter must be a finite value >= 1");
    }
};

struct Stratum {
    std::string id;
    std::vector<std::uint8_t> treated;          // exactly one set once canonical
    std::vector<std::vector<double>> outcomes;  // member -> K values
    // -1 when the stratum arrived with one control and several treated and was
    // label-flipped into the one-treated form; score builders negate q here.
    double orientation = 1.0;

    int size() const { return static_cast<int>(treated.size()); }

    int treated_index() const {
        for (int j = 0; j < size(); ++j)
            if (treated[static_cast<std::size_t>(j)]) return j;
        return -1;
    }
};

struct MatchedDesign {
    std::vector<Stratum> strata;
    std::vector<std::string> outcome_names;

    int outcome_count() const { return static_cast<int>(outcome_names.size()); }
    int stratum_count() const { return static_cast<int>(strata.size()); }

    int total_individuals() const {
        int n = 0;
        for (const auto& s : strata) n += s.size();
        return n;
    }

    std::vector<int> stratum_sizes() const {
        std::vector<int> sz;
        sz.reserve(strata.size());
        for (const auto& s : strata) sz.push_back(s.size());
        return sz;
    }

    std::vector<int> member_offsets() const {
        std::vector<int> off(strata.size() + 1, 0);
        for (std::size_t i = 0; i < strata.size(); ++i)
            off[i + 1] = off[i] + strata[i].size();
        return off;
    }

    bool all_pairs() const {
        for (const auto& s : strata)
            if (s.size() != 2) return false;
        return !strata.empty();
    }

    // Number of possible treatment assignments, clamped at cap+1 on overflow.
    std::uint64_t assignment_count(std::uint64_t cap) const {
        std::uint64_t total = 1;
        for (const auto& s : strata) {
            total *= static_cast<std::uint64_t>(s.size());
            if (total > cap) return cap + 1;
        }
        return total;
    }
};

enum class NullKind { sharp, additive, multiplicative };
enum class Alternative { two_sided, greater, less };

struct OutcomeNull {
    NullKind kind = NullKind::sharp;
    double effect = 0.0; // tau for additive, beta (> 0) for multiplicative
    Alternative alternative = Alternative::two_sided;
};

struct HypothesisSpec {
    std::vector<OutcomeNull> outcomes; // one per outcome column

    static HypothesisSpec sharp(int k, Alternative alt = Alternative::two_sided) {
        HypothesisSpec spec;
        spec.outcomes.assign(static_cast<std::size_t>(k), OutcomeNull{NullKind::sharp, 0.0, alt});
        return spec;
    }

    void validate(int k) const {
        if (static_cast<int>(outcomes.size()) != k)
            throw input_error("hypothesis spec has " + std::to_string(outcomes.size()) +
                              " outcomes, design has " + std::to_string(k));
        for (const auto& o : outcomes) {
            if (!std::isfinite(o.effect))
                throw input_error("hypothesis effect must be finite");
            if (o.kind == NullKind::multiplicative && !(o.effect > 0.0))
                throw input_error("multiplicative effect must be > 0");
        }
    }
};

// Adjusted outcomes F (N x K, rows in design member order).
struct OutcomeMatrix {
    std::vector<double> data;
    int rows = 0;
    int cols = 0;

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

// Bring every stratum into the one-treated form. Strata that arrive with one
// control and several treated are label-flipped and their score orientation
// negated. Idempotent.
inline void canonicalize(MatchedDesign& design) {
    for (auto& s : design.strata) {
        int n = s.size();
        if (n < 2)
            throw input_error("stratum '" + s.id + "' has fewer than 2 members");
        int t = 0;
        for (auto z : s.treated) t += z;
        if (t == 1) continue;
        if (n - t == 1) {
            for (auto& z : s.treated) z = z ? 0 : 1;
            s.orientation = -s.orientation;
        } else if (t == 0) {
            throw input_error("stratum '" + s.id + "' has no treated member");
        } else {
            throw input_error("stratum '" + s.id + "' has " + std::to_string(t) +
                              " treated and " + std::to_string(n - t) +
                              " controls; need exactly one of either");
        }
    }
}

inline void validate(const MatchedDesign& design) {
    if (design.strata.empty()) throw input_error("no strata");
    if (design.outcome_count() < 1) throw input_error("no outcome columns");
    for (const auto& s : design.strata) {
        if (s.size() < 2)
            throw input_error("stratum '" + s.id + "' has fewer than 2 members");
        int t = 0;
        for (auto z : s.treated) t += z;
        if (t != 1)
            throw input_error("stratum '" + s.id + "' is not in one-treated form");
        for (const auto& row : s.outcomes) {
            if (static_cast<int>(row.size()) != design.outcome_count())
                throw input_error("stratum '" + s.id + "' has a member with wrong outcome count");
            for (double v : row)
                if (!std::isfinite(v))
                    throw input_error("stratum '" + s.id + "' has a non-finite outcome value");
        }
    }
}

struct ColumnSchema {
    std::string stratum_col = "stratum";
    std::string treated_col = "treated";
    std::vector<std::string> outcome_cols;
};

inline MatchedDesign load_design(const std::string& path, const ColumnSchema& schema) {
    if (schema.outcome_cols.empty()) throw input_error("schema names no outcome columns");
    CsvTable table = read_csv(path);
    int stratum_c = table.column(schema.stratum_col);
    int treated_c = table.column(schema.treated_col);
    std::vector<int> outcome_c;
    for (const auto& name : schema.outcome_cols) outcome_c.push_back(table.column(name));

    MatchedDesign design;
    design.outcome_names = schema.outcome_cols;
    std::vector<std::string> order; // stratum ids by first appearance
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::string where = "row " + std::to_string(r + 2);
        const std::string& sid = row[static_cast<std::size_t>(stratum_c)];
        int idx = -1;
        for (std::size_t i = 0; i < order.size(); ++i)
            if (order[i] == sid) { idx = static_cast<int>(i); break; }
        if (idx < 0) {
            idx = static_cast<int>(order.size());
            order.push_back(sid);
            design.strata.push_back(Stratum{sid, {}, {}, 1.0});
        }
        const std::string& z = row[static_cast<std::size_t>(treated_c)];
        if (z != "0" && z != "1")
            throw input_error(where + ", column '" + schema.treated_col +
                              "': expected 0 or 1, got '" + z + "'");
        std::vector<double> vals;
        vals.reserve(outcome_c.size());
        for (std::size_t k = 0; k < outcome_c.size(); ++k) {
            double v = parse_double(row[static_cast<std::size_t>(outcome_c[k])],
                                    where + ", column '" + schema.outcome_cols[k] + "'");
            if (!std::isfinite(v))
                throw input_error(where + ", column '" + schema.outcome_cols[k] +
                                  "': value must be finite");
            vals.push_back(v);
        }
        auto& s = design.strata[static_cast<std::size_t>(idx)];
        s.treated.push_back(z == "1" ? 1 : 0);
        s.outcomes.push_back(std::move(vals));
    }
    if (design.strata.empty()) throw input_error("no strata");
    canonicalize(design);
    validate(design);
    return design;
}

// Apply the null hypothesis adjustment: sharp leaves R unchanged; additive
// subtracts tau_k from treated values; multiplicative divides treated values
// by beta_k (the shift is additive on the log scale). Controls are never
// touched.
inline OutcomeMatrix apply_hypothesis(const MatchedDesign& design, const HypothesisSpec& spec) {
    const int k_count = design.outcome_count();
    spec.validate(k_count);
    OutcomeMatrix f;
    f.rows = design.total_individuals();
    f.cols = k_count;
    f.data.reserve(static_cast<std::size_t>(f.rows) * k_count);
    for (const auto& s : design.strata) {
        for (int j = 0; j < s.size(); ++j) {
            const auto& row = s.outcomes[static_cast<std::size_t>(j)];
            for (int k = 0; k < k_count; ++k) {
                double v = row[static_cast<std::size_t>(k)];
                const auto& null_k = spec.outcomes[static_cast<std::size_t>(k)];
                if (s.treated[static_cast<std::size_t>(j)]) {
                    switch (null_k.kind) {
                        case NullKind::sharp: break;
                        case NullKind::additive: v -= null_k.effect; break;
                        case NullKind::multiplicative:
                            if (!(v > 0.0))
                                throw input_error(
                                    "multiplicative null needs positive outcomes; stratum '" +
                                    s.id + "' outcome '" +
                                    design.outcome_names[static_cast<std::size_t>(k)] +
                                    "' has a non-positive value");
                            v /= null_k.effect;
                            break;
                    }
                } else if (null_k.kind == NullKind::multiplicative && !(v > 0.0)) {
                    throw input_error("multiplicative null needs positive outcomes; stratum '" +
                                      s.id + "' outcome '" +
                                      design.outcome_names[static_cast<std::size_t>(k)] +
                                      "' has a non-positive value");
                }
                f.data.push_back(v);
            }
        }
    }
    return f;
}

} // namespace sensi
