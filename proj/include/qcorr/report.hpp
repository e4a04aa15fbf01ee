// report.hpp — pipeline orchestration and report emission. Reports are pure
// functions of the scenario text: fixed section order, sorted collections,
// and all floating-point values rendered at 12 significant digits.

#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <set>
#include <string>

#include "qcorr/classical_prob.hpp"
#include "qcorr/entropy.hpp"
#include "qcorr/rvr.hpp"
#include "qcorr/scenario.hpp"

namespace qcorr::cli {

enum class Section { rvr, bell, entropy, hvm, oracle };

struct RunOptions {
    std::optional<int> max_subset_override;
    bool full_sphere = false;
    bool timestamp = false;
    bool include_oracle = false;
    std::optional<std::set<Section>> only;  // restrict to these sections
};

struct Report {
    nlohmann::ordered_json doc;
    bool violations = false;
    bool section_errors = false;
};

namespace detail {

inline std::string fnv1a64_hex(const std::string& text) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= static_cast<uint64_t>(c);
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

// Stable serializer: nlohmann's dump would render doubles shortest-roundtrip;
// reports pin them to 12 significant digits instead.
inline void write_json(std::string& out, const nlohmann::ordered_json& j, int indent) {
    const std::string pad(static_cast<size_t>(indent) * 2, ' ');
    const std::string pad_in(static_cast<size_t>(indent + 1) * 2, ' ');
    if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{\n";
        size_t k = 0;
        for (const auto& [key, value] : j.items()) {
            out += pad_in;
            out += nlohmann::json(key).dump();
            out += ": ";
            write_json(out, value, indent + 1);
            if (++k < j.size()) out += ",";
            out += "\n";
        }
        out += pad + "}";
        return;
    }
    if (j.is_array()) {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[\n";
        for (size_t i = 0; i < j.size(); ++i) {
            out += pad_in;
            write_json(out, j[i], indent + 1);
            if (i + 1 < j.size()) out += ",";
            out += "\n";
        }
        out += pad + "]";
        return;
    }
    if (j.is_number_float()) {
        out += format_double(j.get<double>());
        return;
    }
    out += j.dump();
}

inline std::string label_for(const rvr::RvrModel& model, int base, int bit) {
    return model.variables[static_cast<size_t>(model.variable_for(base, bit == 0))].label;
}

inline nlohmann::ordered_json quad_json(const rvr::RvrModel& model,
                                        const rvr::QuadrilateralSlack& q) {
    nlohmann::ordered_json entry;
    nlohmann::ordered_json vars = nlohmann::ordered_json::array();
    for (int v : q.variables) vars.push_back(model.variables[static_cast<size_t>(v)].label);
    entry["variables"] = vars;
    entry["slack"] = q.slack;
    return entry;
}

inline rvr::RvrModel build_model(const ScenarioFile& sc, const RunOptions& opt) {
    std::vector<hilbert::Projector> ps;
    std::vector<std::string> labels;
    for (const NamedProjector& p : sc.projectors) {
        ps.push_back(p.projector);
        labels.push_back(p.name);
    }
    int max_subset = 4;
    if (sc.rvr && sc.rvr->max_subset) max_subset = *sc.rvr->max_subset;
    if (opt.max_subset_override) max_subset = *opt.max_subset_override;
    return rvr::build_rvr(ps, sc.state, max_subset, labels);
}

inline nlohmann::ordered_json run_rvr_section(const ScenarioFile& sc, const RunOptions& opt,
                                              bool& violation) {
    nlohmann::ordered_json out;
    if (sc.projectors.empty())
        throw ScenarioValidationError("rvr analysis needs at least one projector");
    const rvr::RvrModel model = build_model(sc, opt);
    out["variable_count"] = static_cast<int>(model.variables.size());
    out["base_variable_count"] = model.base_count;

    nlohmann::ordered_json marginals = nlohmann::ordered_json::array();
    for (const auto& [key, p] : model.defined) {
        nlohmann::ordered_json entry;
        nlohmann::ordered_json subset = nlohmann::ordered_json::array();
        for (const auto& [base, bit] : key) subset.push_back(label_for(model, base, bit));
        entry["subset"] = subset;
        entry["probability"] = p;
        marginals.push_back(entry);
    }
    out["defined_marginals"] = marginals;
    out["defined_count"] = static_cast<int>(model.defined.size());

    const std::vector<rvr::QuadrilateralSlack> scan = rvr::scan_quadrilaterals(model);
    nlohmann::ordered_json quads = nlohmann::ordered_json::array();
    for (const rvr::QuadrilateralSlack& q : scan) quads.push_back(quad_json(model, q));
    out["quadrilateral_scan"] = quads;
    if (!scan.empty()) out["min_quadrilateral_slack"] = scan.front().slack;

    const rvr::FeasibilityResult lp = rvr::completeness_lp(model);
    nlohmann::ordered_json lp_json;
    lp_json["status"] =
        lp.status == rvr::FeasibilityResult::Status::complete ? "complete" : "incomplete";
    lp_json["phase1_objective"] = lp.phase1_objective;
    if (lp.status == rvr::FeasibilityResult::Status::complete) {
        if (model.base_count <= 8) {
            nlohmann::ordered_json atoms = nlohmann::ordered_json::array();
            for (double a : lp.witness.probs) atoms.push_back(a);
            lp_json["witness_atoms"] = atoms;
        } else {
            lp_json["witness_atom_count"] = static_cast<int>(lp.witness.probs.size());
        }
    } else {
        nlohmann::ordered_json cert;
        if (lp.certificate.kind == rvr::FeasibilityCertificate::Kind::quadrilateral) {
            cert["kind"] = "quadrilateral";
            cert["quadrilateral"] = quad_json(model, lp.certificate.quad);
        } else {
            cert["kind"] = "lp_dual";
            nlohmann::ordered_json w = nlohmann::ordered_json::array();
            for (double v : lp.certificate.dual_weights) w.push_back(v);
            cert["dual_weights"] = w;
        }
        cert["slack"] = lp.certificate.slack;
        lp_json["certificate"] = cert;
    }
    out["lp"] = lp_json;

    const auto ks = rvr::kochen_specker_witness(model);
    out["kochen_specker_witness"] =
        ks ? quad_json(model, *ks) : nlohmann::ordered_json(nullptr);

    violation = lp.status == rvr::FeasibilityResult::Status::incomplete;
    out["violation"] = violation;
    return out;
}

// Extracts the qubit-level projector of an embedded setting; slot 0 = Alice.
inline hilbert::Projector qubit_part(const NamedProjector& p, int slot) {
    if (p.spin_slot) {
        if (*p.spin_slot != slot)
            throw ScenarioValidationError("projector '" + p.name + "' acts on slot " +
                                          std::to_string(*p.spin_slot) + ", expected " +
                                          std::to_string(slot));
        return p.spin->projector();
    }
    const hilbert::Operator reduced =
        hilbert::partial_trace_op(p.projector.op(), {2, 2}, 1 - slot);
    hilbert::Operator half = hilbert::scale(reduced, 0.5);
    const hilbert::Projector q = hilbert::validate_projector(half);
    if (!hilbert::approx_equal(hilbert::embed(q.op(), {2, 2}, slot), p.projector.op()))
        throw ScenarioValidationError("projector '" + p.name + "' is not of the form " +
                                      (slot == 0 ? "P (x) I" : "I (x) Q"));
    return q;
}

inline nlohmann::ordered_json run_bell_section(const ScenarioFile& sc, const RunOptions& opt,
                                               bool& violation) {
    nlohmann::ordered_json out;
    if (!sc.subsystems || sc.subsystems->size() != 2 || (*sc.subsystems)[0] != 2 ||
        (*sc.subsystems)[1] != 2)
        throw ScenarioValidationError("bell analysis needs subsystems [2, 2]");
    const BellRequest& req = *sc.bell_request;

    const hilbert::Projector a1 = qubit_part(sc.projector_by_name(req.alice[0]), 0);
    const hilbert::Projector a2 = qubit_part(sc.projector_by_name(req.alice[1]), 0);
    const hilbert::Projector b1 = qubit_part(sc.projector_by_name(req.bob[0]), 1);
    const hilbert::Projector b2 = qubit_part(sc.projector_by_name(req.bob[1]), 1);
    const bell::TwoQubitScenario scenario(sc.state, a1, a2, b1, b2);

    const double e11 = bell::setting_expectation(sc.state, scenario.alice[0], scenario.bob[0]);
    const double e21 = bell::setting_expectation(sc.state, scenario.alice[1], scenario.bob[0]);
    const double e12 = bell::setting_expectation(sc.state, scenario.alice[0], scenario.bob[1]);
    const double e22 = bell::setting_expectation(sc.state, scenario.alice[1], scenario.bob[1]);
    const double chsh = cprob::chsh_value(e11, e21, e12, e22);

    nlohmann::ordered_json fixed;
    fixed["expectations"] = {{req.alice[0] + "*" + req.bob[0], e11},
                             {req.alice[1] + "*" + req.bob[0], e21},
                             {req.alice[0] + "*" + req.bob[1], e12},
                             {req.alice[1] + "*" + req.bob[1], e22}};
    fixed["chsh"] = chsh;
    fixed["exceeds_classical_bound"] = std::abs(chsh) > 2.0 + 1e-9;
    out["settings"] = fixed;

    violation = std::abs(chsh) > 2.0 + 1e-9;

    if (req.maximize) {
        const bell::ChshMaximum m = bell::maximize_chsh(sc.state, opt.full_sphere);
        nlohmann::ordered_json mj;
        mj["value"] = m.value;
        auto side = [&](const std::array<bell::QubitSetting, 2>& s) {
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const bell::QubitSetting& q : s) {
                nlohmann::ordered_json one;
                one["polar_deg"] = q.polar_rad * 180.0 / M_PI;
                one["azimuth_deg"] = q.azimuth_rad * 180.0 / M_PI;
                arr.push_back(one);
            }
            return arr;
        };
        mj["alice"] = side(m.settings.alice);
        mj["bob"] = side(m.settings.bob);
        mj["full_sphere"] = opt.full_sphere;
        mj["exceeds_classical_bound"] = m.value > 2.0 + 1e-9;
        out["maximize"] = mj;
        violation = violation || m.value > 2.0 + 1e-9;
    }
    out["violation"] = violation;
    return out;
}

inline nlohmann::ordered_json run_entropy_section(const ScenarioFile& sc, bool& violation) {
    nlohmann::ordered_json out;
    std::vector<int> dims;
    if (sc.entropy_request && sc.entropy_request->subsystems)
        dims = *sc.entropy_request->subsystems;
    else if (sc.subsystems)
        dims = *sc.subsystems;
    else
        throw ScenarioValidationError("entropy analysis needs a subsystem factorization");

    const entropy::EntropyReport r = entropy::information_inequality_report(sc.state, dims);
    const double ln2 = std::log(2.0);
    nlohmann::ordered_json dj = nlohmann::ordered_json::array();
    for (int d : dims) dj.push_back(d);
    out["subsystems"] = dj;
    out["total_nats"] = r.total;
    out["total_bits"] = r.total / ln2;
    nlohmann::ordered_json parts = nlohmann::ordered_json::array();
    nlohmann::ordered_json parts_bits = nlohmann::ordered_json::array();
    for (double s : r.parts) {
        parts.push_back(s);
        parts_bits.push_back(s / ln2);
    }
    out["parts_nats"] = parts;
    out["parts_bits"] = parts_bits;
    out["lower_bound_slack"] = r.lower_bound_slack;
    out["subadditivity_slack"] = r.subadditivity_slack;
    out["violation"] = r.violation;
    if (r.violation) out["violating_subsystem"] = r.violating_subsystem;
    out["product_state"] = entropy::is_product_state(sc.state, dims);

    // Juxtaposed Bell probe for two-qubit states: the entropy flag and the
    // CHSH maximum side by side, no equivalence asserted.
    if (dims.size() == 2 && dims[0] == 2 && dims[1] == 2)
        out["chsh_max"] = bell::maximize_chsh(sc.state).value;

    violation = r.violation;
    return out;
}

inline nlohmann::ordered_json run_hvm_section(const ScenarioFile& sc) {
    nlohmann::ordered_json out;
    const HvmRequest& req = *sc.hvm_request;
    nlohmann::ordered_json exps = nlohmann::ordered_json::array();
    for (const HvmExpectationRequest& e : req.expectations) {
        nlohmann::ordered_json one;
        one["model"] = e.model;
        nlohmann::ordered_json obs = nlohmann::ordered_json::array();
        for (const std::string& o : e.observables) obs.push_back(o);
        one["observables"] = obs;
        one["value"] = bell::hvm_expectation(sc.hvm_models.at(e.model), e.observables);
        exps.push_back(one);
    }
    out["expectations"] = exps;
    nlohmann::ordered_json chshs = nlohmann::ordered_json::array();
    for (const HvmChshRequest& e : req.chsh) {
        nlohmann::ordered_json one;
        one["model"] = e.model;
        nlohmann::ordered_json labels = nlohmann::ordered_json::array();
        for (const std::string& l : e.labels) labels.push_back(l);
        one["labels"] = labels;
        const double v = bell::hvm_chsh(sc.hvm_models.at(e.model), e.labels[0], e.labels[1],
                                        e.labels[2], e.labels[3]);
        one["value"] = v;
        one["within_classical_bound"] = std::abs(v) <= 2.0 + 1e-12;
        chshs.push_back(one);
    }
    out["chsh"] = chshs;
    out["violation"] = false;
    return out;
}

inline nlohmann::ordered_json run_oracle_section(const ScenarioFile& sc, const RunOptions& opt,
                                                 bool& attention) {
    nlohmann::ordered_json out;
    if (sc.projectors.empty())
        throw ScenarioValidationError("oracle analysis needs at least one projector");
    const rvr::RvrModel model = build_model(sc, opt);
    const std::vector<rvr::MarginalEntry> entries = rvr::marginal_entries(model);

    const lp::LpOutcome float_out =
        lp::solve_feasibility(rvr::lp_problem_from_marginals(model.base_count, entries, 1e-9));
    const char* float_status = float_out.status == lp::LpStatus::feasible     ? "feasible"
                               : float_out.status == lp::LpStatus::infeasible ? "infeasible"
                                                                              : "ambiguous";
    out["float_status"] = float_status;
    out["float_phase1_objective"] = float_out.phase1_objective;

    const rvr::HullInstance hull =
        rvr::hull_instance_from_marginals(model.base_count, entries);
    const lp::HullMembership exact = lp::hull_membership_oracle(hull.vertices, hull.target);
    out["exact_member"] = exact.is_member;
    out["rationalization_max_denominator"] = 1000000000000ULL;

    if (float_out.status == lp::LpStatus::ambiguous) {
        out["agree"] = nlohmann::ordered_json(nullptr);  // nothing to compare
        attention = false;
    } else {
        const bool agree = (float_out.status == lp::LpStatus::feasible) == exact.is_member;
        out["agree"] = agree;
        attention = !agree;
    }
    return out;
}

}  // namespace detail

inline Report run(const ScenarioFile& sc, const RunOptions& opt = {}) {
    Report report;
    report.doc["format_version"] = 1;
    report.doc["scenario_hash"] = "fnv1a64:" + detail::fnv1a64_hex(sc.raw_text);
    if (opt.timestamp) {
        const auto now = std::chrono::system_clock::now();
        const std::time_t tt = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
        report.doc["timestamp"] = std::string(buf);
    }

    auto wants = [&](Section s) {
        return !opt.only || opt.only->count(s) > 0;
    };

    nlohmann::ordered_json analyses;
    auto run_section = [&](const char* name, Section s, bool configured, auto&& fn) {
        if (!configured || !wants(s)) return;
        try {
            bool violation = false;
            analyses[name] = fn(violation);
            report.violations = report.violations || violation;
        } catch (const Error& e) {
            nlohmann::ordered_json err;
            err["error"] = std::string(e.what());
            analyses[name] = err;
            report.section_errors = true;
        }
    };

    run_section("rvr", Section::rvr, sc.rvr.has_value(),
                [&](bool& v) { return detail::run_rvr_section(sc, opt, v); });
    run_section("bell", Section::bell, sc.bell_request.has_value(),
                [&](bool& v) { return detail::run_bell_section(sc, opt, v); });
    run_section("entropy", Section::entropy, sc.entropy_request.has_value(),
                [&](bool& v) { return detail::run_entropy_section(sc, v); });
    run_section("hvm", Section::hvm, sc.hvm_request.has_value(), [&](bool& v) {
        v = false;
        return detail::run_hvm_section(sc);
    });
    if (opt.include_oracle)
        run_section("oracle", Section::oracle, true,
                    [&](bool& v) { return detail::run_oracle_section(sc, opt, v); });

    report.doc["analyses"] = analyses;
    report.doc["violations"] = report.violations;
    return report;
}

inline std::string emit_structured(const Report& report) {
    std::string out;
    detail::write_json(out, report.doc, 0);
    out += "\n";
    return out;
}

namespace detail {

inline void write_text(std::string& out, const nlohmann::ordered_json& j,
                       const std::string& prefix) {
    if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object() || (value.is_array() && !value.empty() &&
                                      (value[0].is_object() || value[0].is_array()))) {
                out += prefix + key + ":\n";
                write_text(out, value, prefix + "  ");
            } else {
                out += prefix + key + ": ";
                write_text(out, value, "");
                out += "\n";
            }
        }
        return;
    }
    if (j.is_array()) {
        if (j.empty()) {
            out += prefix.empty() ? "[]" : prefix + "(none)\n";
            return;
        }
        if (j[0].is_object() || j[0].is_array()) {
            for (size_t i = 0; i < j.size(); ++i) {
                out += prefix + "- [" + std::to_string(i) + "]\n";
                write_text(out, j[i], prefix + "  ");
            }
        } else {
            std::string line;
            for (size_t i = 0; i < j.size(); ++i) {
                if (i) line += ", ";
                if (j[i].is_number_float()) line += format_double(j[i].get<double>());
                else if (j[i].is_string()) line += j[i].get<std::string>();
                else line += j[i].dump();
            }
            out += prefix.empty() ? line : prefix + line + "\n";
        }
        return;
    }
    if (j.is_number_float()) {
        out += format_double(j.get<double>());
        return;
    }
    if (j.is_string()) {
        out += j.get<std::string>();
        return;
    }
    out += j.dump();
}

}  // namespace detail

inline std::string emit_text(const Report& report) {
    std::string out = "qcorr report\n============\n";
    detail::write_text(out, report.doc, "");
    return out;
}

}  // namespace qcorr::cli
