// scenario.hpp — scenario-file ingestion: strict JSON parsing, builtin state
// construction, projector resolution, and validation of every operator on
// load. Unknown keys are errors; nothing is silently ignored.

#pragma once

#include <json.hpp>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcorr/bell.hpp"
#include "qcorr/entropy.hpp"
#include "qcorr/errors.hpp"
#include "qcorr/operators.hpp"

namespace qcorr::cli {

using hilbert::Complex;
using hilbert::DensityOperator;
using hilbert::Operator;
using hilbert::Projector;

struct RvrRequest {
    std::optional<int> max_subset;
};

struct BellRequest {
    std::array<std::string, 2> alice;
    std::array<std::string, 2> bob;
    bool maximize = false;
};

struct EntropyRequest {
    std::optional<std::vector<int>> subsystems;
};

struct HvmExpectationRequest {
    std::string model;
    std::vector<std::string> observables;
};

struct HvmChshRequest {
    std::string model;
    std::array<std::string, 4> labels;
};

struct HvmRequest {
    std::vector<HvmExpectationRequest> expectations;
    std::vector<HvmChshRequest> chsh;
};

struct NamedProjector {
    std::string name;
    Projector projector = hilbert::unchecked_projector(hilbert::identity(1));
    std::optional<int> spin_slot;                 // set when built from a spin spec
    std::optional<bell::QubitSetting> spin;       // ditto
};

struct ScenarioFile {
    int format_version = 1;
    int dimension = 1;
    std::optional<std::vector<int>> subsystems;
    DensityOperator state;
    std::vector<NamedProjector> projectors;
    std::optional<RvrRequest> rvr;
    std::optional<BellRequest> bell_request;
    std::optional<EntropyRequest> entropy_request;
    std::optional<HvmRequest> hvm_request;
    std::map<std::string, bell::HvmModel> hvm_models;
    std::string raw_text;

    ScenarioFile() : state(DensityOperator::validate(hilbert::identity(1))) {}

    const NamedProjector& projector_by_name(const std::string& name) const {
        for (const NamedProjector& p : projectors)
            if (p.name == name) return p;
        throw ScenarioValidationError("projector '" + name + "' is not declared");
    }
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& obj, const std::string& where,
                         const std::vector<std::string>& allowed) {
    if (!obj.is_object()) throw ScenarioSyntaxError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const std::string& a : allowed)
            if (key == a) ok = true;
        if (!ok) throw ScenarioSyntaxError(where + ": unknown key '" + key + "'");
    }
}

inline double number_at(const json& j, const std::string& where) {
    if (!j.is_number()) throw ScenarioSyntaxError(where + ": expected a number");
    return j.get<double>();
}

inline Operator parse_matrix(const json& j, int expected_dim, const std::string& where) {
    if (!j.is_array()) throw ScenarioSyntaxError(where + ": matrix must be an array of rows");
    const int dim = static_cast<int>(j.size());
    if (expected_dim > 0 && dim != expected_dim)
        throw ScenarioValidationError(where + ": matrix is " + std::to_string(dim) + "x" +
                                      std::to_string(dim) + ", expected dimension " +
                                      std::to_string(expected_dim));
    Operator m(dim);
    for (int r = 0; r < dim; ++r) {
        const json& row = j[static_cast<size_t>(r)];
        if (!row.is_array() || static_cast<int>(row.size()) != dim)
            throw ScenarioSyntaxError(where + ": row " + std::to_string(r) +
                                      " must hold exactly " + std::to_string(dim) + " entries");
        for (int c = 0; c < dim; ++c) {
            const json& cell = row[static_cast<size_t>(c)];
            if (!cell.is_array() || cell.size() != 2)
                throw ScenarioSyntaxError(where + ": entry (" + std::to_string(r) + ", " +
                                          std::to_string(c) + ") must be a [real, imag] pair");
            m(r, c) = Complex{number_at(cell[0], where), number_at(cell[1], where)};
        }
    }
    return m;
}

inline double parse_angle_deg(const json& j, const std::string& where) {
    const double a = number_at(j, where);
    if (a < 0.0 || a >= 360.0)
        throw ScenarioValidationError(where + ": angle must lie in [0, 360)");
    return a;
}

inline DensityOperator parse_state(const json& j, int dimension,
                                   const std::optional<std::vector<int>>& subsystems) {
    require_keys(j, "state", {"builtin", "matrix", "product"});
    const int forms = static_cast<int>(j.contains("builtin")) +
                      static_cast<int>(j.contains("matrix")) +
                      static_cast<int>(j.contains("product"));
    if (forms != 1)
        throw ScenarioSyntaxError("state: exactly one of builtin | matrix | product required");

    try {
        if (j.contains("builtin")) {
            const std::string name = j["builtin"].get<std::string>();
            if (name == "singlet") {
                if (dimension != 4)
                    throw ScenarioValidationError("state: the singlet builtin needs dimension 4");
                return entropy::make_singlet();
            }
            if (name == "maximally_mixed")
                return DensityOperator::validate(
                    hilbert::scale(hilbert::identity(dimension), 1.0 / dimension));
            throw UnknownBuiltinError(name);
        }
        if (j.contains("matrix"))
            return DensityOperator::validate(parse_matrix(j["matrix"], dimension, "state"));

        // product: density operators per factor, tensored left to right.
        const json& factors = j["product"];
        if (!factors.is_array() || factors.empty())
            throw ScenarioSyntaxError("state: product needs a nonempty array of matrices");
        if (subsystems && factors.size() != subsystems->size())
            throw ScenarioValidationError("state: product factor count must match subsystems");
        Operator acc = hilbert::identity(1);
        for (size_t f = 0; f < factors.size(); ++f) {
            const int fdim = subsystems ? (*subsystems)[f] : -1;
            const Operator factor = parse_matrix(factors[f], fdim,
                                                 "state.product[" + std::to_string(f) + "]");
            DensityOperator::validate(factor);  // each factor is itself a state
            acc = hilbert::tensor_product(acc, factor);
        }
        if (acc.dim() != dimension)
            throw ScenarioValidationError("state: product dimensions do not multiply to " +
                                          std::to_string(dimension));
        return DensityOperator::validate(acc);
    } catch (const NotHermitianError& e) {
        throw ScenarioValidationError(std::string("state: not Hermitian, residual ") +
                                      std::to_string(e.residual));
    } catch (const NotDensityError& e) {
        throw ScenarioValidationError(std::string("state: ") + e.what());
    }
}

inline NamedProjector parse_projector(const json& j, int dimension,
                                      const std::optional<std::vector<int>>& subsystems,
                                      size_t index) {
    const std::string where = "projectors[" + std::to_string(index) + "]";
    require_keys(j, where, {"name", "matrix", "spin"});
    if (!j.contains("name") || !j["name"].is_string())
        throw ScenarioSyntaxError(where + ": needs a string 'name'");
    NamedProjector out;
    out.name = j["name"].get<std::string>();
    const int forms =
        static_cast<int>(j.contains("matrix")) + static_cast<int>(j.contains("spin"));
    if (forms != 1)
        throw ScenarioSyntaxError(where + ": exactly one of matrix | spin required");

    try {
        if (j.contains("matrix")) {
            out.projector = hilbert::validate_projector(
                parse_matrix(j["matrix"], dimension, where + " ('" + out.name + "')"));
            return out;
        }
        const json& spin = j["spin"];
        require_keys(spin, where + ".spin", {"angle_deg", "azimuth_deg", "slot"});
        if (!spin.contains("angle_deg") || !spin.contains("slot"))
            throw ScenarioSyntaxError(where + ".spin: needs angle_deg and slot");
        if (!subsystems)
            throw ScenarioValidationError(where + ": spin projectors need top-level subsystems");
        const double polar = parse_angle_deg(spin["angle_deg"], where + ".spin.angle_deg");
        const double azim = spin.contains("azimuth_deg")
                                ? parse_angle_deg(spin["azimuth_deg"], where + ".spin.azimuth_deg")
                                : 0.0;
        if (!spin["slot"].is_number_integer())
            throw ScenarioSyntaxError(where + ".spin.slot: expected an integer");
        const int slot = spin["slot"].get<int>();
        if (slot < 0 || slot >= static_cast<int>(subsystems->size()))
            throw ScenarioValidationError(where + ".spin.slot: out of range");
        if ((*subsystems)[static_cast<size_t>(slot)] != 2)
            throw ScenarioValidationError(where + ".spin: slot " + std::to_string(slot) +
                                          " is not a qubit");
        const double to_rad = M_PI / 180.0;
        out.spin = bell::QubitSetting{polar * to_rad, azim * to_rad};
        out.spin_slot = slot;
        out.projector = hilbert::validate_projector(
            hilbert::embed(out.spin->projector().op(), *subsystems, slot));
        return out;
    } catch (const NotHermitianError& e) {
        throw ScenarioValidationError(where + " ('" + out.name + "'): not Hermitian, residual " +
                                      std::to_string(e.residual));
    } catch (const NotIdempotentError& e) {
        throw ScenarioValidationError(where + " ('" + out.name +
                                      "'): not idempotent, residual " +
                                      std::to_string(e.residual));
    }
}

inline bell::HvmModel parse_hvm_model(const json& j, size_t index, std::string& name_out) {
    const std::string where = "hvm[" + std::to_string(index) + "]";
    require_keys(j, where, {"name", "weights", "observables", "responses"});
    for (const char* k : {"name", "weights", "observables", "responses"})
        if (!j.contains(k))
            throw ScenarioSyntaxError(where + ": missing key '" + std::string(k) + "'");
    name_out = j["name"].get<std::string>();
    bell::HvmModel m;
    for (const json& o : j["observables"]) {
        if (!o.is_string()) throw ScenarioSyntaxError(where + ".observables: expected strings");
        m.observables.push_back(o.get<std::string>());
    }
    for (const json& w : j["weights"]) m.weights.push_back(number_at(w, where + ".weights"));
    for (const json& row : j["responses"]) {
        if (!row.is_array())
            throw ScenarioSyntaxError(where + ".responses: expected arrays of 0/1");
        std::vector<uint8_t> r;
        for (const json& v : row) {
            if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
                throw ScenarioSyntaxError(where + ".responses: entries must be 0 or 1");
            r.push_back(static_cast<uint8_t>(v.get<int>()));
        }
        m.responses.push_back(std::move(r));
    }
    try {
        m.validate();
    } catch (const Error& e) {
        throw ScenarioValidationError(where + " ('" + name_out + "'): " + e.what());
    }
    return m;
}

inline HvmRequest parse_hvm_request(const json& j) {
    require_keys(j, "analyses.hvm", {"expectations", "chsh"});
    HvmRequest out;
    if (j.contains("expectations")) {
        for (const json& e : j["expectations"]) {
            require_keys(e, "analyses.hvm.expectations[]", {"model", "observables"});
            HvmExpectationRequest r;
            r.model = e.at("model").get<std::string>();
            for (const json& o : e.at("observables")) r.observables.push_back(o.get<std::string>());
            out.expectations.push_back(std::move(r));
        }
    }
    if (j.contains("chsh")) {
        for (const json& e : j["chsh"]) {
            require_keys(e, "analyses.hvm.chsh[]", {"model", "labels"});
            HvmChshRequest r;
            r.model = e.at("model").get<std::string>();
            const json& labels = e.at("labels");
            if (!labels.is_array() || labels.size() != 4)
                throw ScenarioSyntaxError("analyses.hvm.chsh[].labels: exactly four labels");
            for (size_t i = 0; i < 4; ++i) r.labels[i] = labels[i].get<std::string>();
            out.chsh.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace detail

inline ScenarioFile parse_scenario(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ScenarioSyntaxError(std::string("scenario is not valid JSON: ") + e.what());
    }

    detail::require_keys(root, "scenario",
                         {"format_version", "dimension", "subsystems", "state", "projectors",
                          "analyses", "hvm"});
    ScenarioFile sc;
    sc.raw_text = text;

    if (!root.contains("format_version") || !root["format_version"].is_number_integer())
        throw ScenarioSyntaxError("scenario: integer format_version is required");
    sc.format_version = root["format_version"].get<int>();
    if (sc.format_version != 1)
        throw ScenarioValidationError("scenario: unsupported format_version " +
                                      std::to_string(sc.format_version));

    if (!root.contains("dimension") || !root["dimension"].is_number_integer())
        throw ScenarioSyntaxError("scenario: integer dimension is required");
    sc.dimension = root["dimension"].get<int>();
    if (sc.dimension < 1 || sc.dimension > 64)
        throw ScenarioValidationError("scenario: dimension must lie in [1, 64]");

    if (root.contains("subsystems")) {
        std::vector<int> dims;
        long long prod = 1;
        for (const nlohmann::json& d : root["subsystems"]) {
            if (!d.is_number_integer() || d.get<int>() < 1)
                throw ScenarioSyntaxError("subsystems: positive integers required");
            dims.push_back(d.get<int>());
            prod *= d.get<int>();
        }
        if (prod != sc.dimension)
            throw ScenarioValidationError("subsystems do not multiply to the dimension");
        sc.subsystems = std::move(dims);
    }

    if (!root.contains("state")) throw ScenarioSyntaxError("scenario: state is required");
    sc.state = detail::parse_state(root["state"], sc.dimension, sc.subsystems);

    if (root.contains("projectors")) {
        if (!root["projectors"].is_array())
            throw ScenarioSyntaxError("projectors: expected an array");
        for (size_t i = 0; i < root["projectors"].size(); ++i) {
            NamedProjector p =
                detail::parse_projector(root["projectors"][i], sc.dimension, sc.subsystems, i);
            for (const NamedProjector& existing : sc.projectors)
                if (existing.name == p.name)
                    throw ScenarioValidationError("projectors: duplicate name '" + p.name + "'");
            sc.projectors.push_back(std::move(p));
        }
    }

    if (root.contains("hvm")) {
        if (!root["hvm"].is_array()) throw ScenarioSyntaxError("hvm: expected an array of models");
        for (size_t i = 0; i < root["hvm"].size(); ++i) {
            std::string name;
            bell::HvmModel m = detail::parse_hvm_model(root["hvm"][i], i, name);
            if (sc.hvm_models.count(name))
                throw ScenarioValidationError("hvm: duplicate model name '" + name + "'");
            sc.hvm_models.emplace(std::move(name), std::move(m));
        }
    }

    if (root.contains("analyses")) {
        const nlohmann::json& an = root["analyses"];
        detail::require_keys(an, "analyses", {"rvr", "bell", "entropy", "hvm"});
        if (an.contains("rvr")) {
            detail::require_keys(an["rvr"], "analyses.rvr", {"max_subset"});
            RvrRequest r;
            if (an["rvr"].contains("max_subset")) {
                if (!an["rvr"]["max_subset"].is_number_integer())
                    throw ScenarioSyntaxError("analyses.rvr.max_subset: integer required");
                r.max_subset = an["rvr"]["max_subset"].get<int>();
                if (*r.max_subset < 2)
                    throw ScenarioValidationError("analyses.rvr.max_subset must be >= 2");
            }
            sc.rvr = r;
        }
        if (an.contains("bell")) {
            const nlohmann::json& b = an["bell"];
            detail::require_keys(b, "analyses.bell", {"alice", "bob", "maximize"});
            BellRequest r;
            for (const char* side : {"alice", "bob"}) {
                if (!b.contains(side) || !b[side].is_array() || b[side].size() != 2)
                    throw ScenarioSyntaxError(std::string("analyses.bell.") + side +
                                              ": exactly two projector names required");
            }
            for (size_t i = 0; i < 2; ++i) {
                r.alice[i] = b["alice"][i].get<std::string>();
                r.bob[i] = b["bob"][i].get<std::string>();
            }
            if (b.contains("maximize")) {
                if (!b["maximize"].is_boolean())
                    throw ScenarioSyntaxError("analyses.bell.maximize: boolean required");
                r.maximize = b["maximize"].get<bool>();
            }
            for (const std::string& n : {r.alice[0], r.alice[1], r.bob[0], r.bob[1]})
                sc.projector_by_name(n);  // must resolve
            sc.bell_request = r;
        }
        if (an.contains("entropy")) {
            detail::require_keys(an["entropy"], "analyses.entropy", {"subsystems"});
            EntropyRequest r;
            if (an["entropy"].contains("subsystems")) {
                std::vector<int> dims;
                long long prod = 1;
                for (const nlohmann::json& d : an["entropy"]["subsystems"]) {
                    if (!d.is_number_integer() || d.get<int>() < 1)
                        throw ScenarioSyntaxError(
                            "analyses.entropy.subsystems: positive integers required");
                    dims.push_back(d.get<int>());
                    prod *= d.get<int>();
                }
                if (prod != sc.dimension)
                    throw ScenarioValidationError(
                        "analyses.entropy.subsystems do not multiply to the dimension");
                r.subsystems = std::move(dims);
            }
            sc.entropy_request = r;
        }
        if (an.contains("hvm")) {
            sc.hvm_request = detail::parse_hvm_request(an["hvm"]);
            for (const HvmExpectationRequest& e : sc.hvm_request->expectations)
                if (!sc.hvm_models.count(e.model))
                    throw ScenarioValidationError("analyses.hvm references unknown model '" +
                                                  e.model + "'");
            for (const HvmChshRequest& e : sc.hvm_request->chsh)
                if (!sc.hvm_models.count(e.model))
                    throw ScenarioValidationError("analyses.hvm references unknown model '" +
                                                  e.model + "'");
        }
    }

    // Entropy needs a factorization from somewhere.
    if (sc.entropy_request && !sc.entropy_request->subsystems && !sc.subsystems)
        throw ScenarioValidationError(
            "analyses.entropy needs subsystems (inline or top-level)");

    return sc;
}

}  // namespace qcorr::cli
