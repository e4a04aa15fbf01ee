// rvr.hpp — random variables representation of a (projector set, state) pair:
// the defined-marginal map over commuting subsets, the completeness decision
// via linear-programming feasibility, and quadrilateral-inequality witnesses
// of incompleteness.

#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcorr/classical_prob.hpp"
#include "qcorr/hull_oracle.hpp"
#include "qcorr/lp.hpp"
#include "qcorr/operators.hpp"
#include "qcorr/quantum_prob.hpp"

namespace qcorr::rvr {

using hilbert::DensityOperator;
using hilbert::Operator;
using hilbert::Projector;

// One dichotomic variable of the representation. Variables come in
// complement pairs sharing a base index; `negated` marks the complement side.
struct Variable {
    Projector projector;
    int base = 0;
    bool negated = false;
    std::string label;
};

// Key of a defined marginal: per-base requirements (base index, bit), sorted
// by base, distinct bases. The value is the probability that every listed
// base variable takes the given bit.
using SubsetKey = std::vector<std::pair<int, int>>;

struct CommutationGraph {
    std::vector<std::vector<bool>> adjacency;  // symmetric with self-loops

    bool edge(int i, int j) const {
        return adjacency[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
};

struct RvrModel {
    std::vector<Variable> variables;       // complement-closed, deduplicated
    int base_count = 0;
    DensityOperator state;
    CommutationGraph graph;                // over `variables`
    std::map<SubsetKey, double> defined;   // quantum marginal per commuting subset
    int max_subset = 4;

    RvrModel() : state(DensityOperator::validate(hilbert::identity(1))) {}

    int variable_for(int base, bool negated) const {
        for (size_t v = 0; v < variables.size(); ++v)
            if (variables[v].base == base && variables[v].negated == negated)
                return static_cast<int>(v);
        throw BadIndexError("no variable for base");
    }

    // Probability that this single variable equals 1, read from the map.
    double single_probability(int variable) const {
        const Variable& v = variables[static_cast<size_t>(variable)];
        return defined.at({{v.base, v.negated ? 0 : 1}});
    }

    std::optional<double> pair_probability(int va, int vb) const {
        const Variable& a = variables[static_cast<size_t>(va)];
        const Variable& b = variables[static_cast<size_t>(vb)];
        if (a.base == b.base) return std::nullopt;
        SubsetKey key{{a.base, a.negated ? 0 : 1}, {b.base, b.negated ? 0 : 1}};
        if (key[0].first > key[1].first) std::swap(key[0], key[1]);
        const auto it = defined.find(key);
        if (it == defined.end()) return std::nullopt;
        return it->second;
    }
};

struct QuadrilateralSlack {
    std::array<int, 4> variables;  // (a1, b1, b2, a2) argument order
    double slack = 0.0;
};

struct FeasibilityCertificate {
    enum class Kind { quadrilateral, lp_dual };
    Kind kind = Kind::quadrilateral;
    QuadrilateralSlack quad;                 // when kind == quadrilateral
    std::vector<double> dual_weights;        // when kind == lp_dual, per LP row
    double slack = 0.0;                      // negative; -margin for lp_dual
};

struct FeasibilityResult {
    enum class Status { complete, incomplete };
    Status status = Status::complete;
    cprob::JointTable witness;               // complete: joint over base variables
    FeasibilityCertificate certificate;      // incomplete
    double phase1_objective = 0.0;
};

// ------------------------------- construction -------------------------------

// Builds the representation: deduplicates projectors (max-norm 1e-9), closes
// the set under complementation, and computes the quantum marginal of every
// mutually-commuting subset of distinct bases up to max_subset. Subsets that
// would pair a variable with its own complement are identically zero and
// carry no information, so they are not part of the map.
inline RvrModel build_rvr(const std::vector<Projector>& projectors, const DensityOperator& rho,
                          int max_subset = 4, const std::vector<std::string>& labels = {}) {
    if (max_subset < 2) throw OutOfRangeError("build_rvr: max_subset must be >= 2");
    for (const Projector& p : projectors)
        if (p.dim() != rho.dim())
            throw DimensionMismatchError("build_rvr: projector/state dimension mismatch");

    RvrModel model;
    model.state = rho;
    model.max_subset = max_subset;

    auto default_label = [&](size_t input_index) {
        if (input_index < labels.size()) return labels[input_index];
        return "p" + std::to_string(input_index);
    };

    // Deduplicate, then attach complements (reusing an input projector when
    // one matches the complement within tolerance).
    for (size_t i = 0; i < projectors.size(); ++i) {
        const Operator& op = projectors[i].op();
        bool duplicate = false;
        for (const Variable& v : model.variables)
            if (hilbert::approx_equal(v.projector.op(), op)) {
                duplicate = true;
                break;
            }
        if (duplicate) continue;
        const int base = model.base_count++;
        model.variables.push_back({projectors[i], base, false, default_label(i)});

        const Operator comp = hilbert::sub(hilbert::identity(rho.dim()), op);
        Projector comp_proj = hilbert::unchecked_projector(comp);
        std::string comp_label = "!" + default_label(i);
        for (size_t j = 0; j < projectors.size(); ++j)
            if (j != i && hilbert::approx_equal(projectors[j].op(), comp)) {
                comp_proj = projectors[j];
                comp_label = default_label(j);
                break;
            }
        model.variables.push_back({comp_proj, base, true, comp_label});
    }

    const int nv = static_cast<int>(model.variables.size());
    model.graph.adjacency.assign(static_cast<size_t>(nv),
                                 std::vector<bool>(static_cast<size_t>(nv), false));
    for (int i = 0; i < nv; ++i) {
        model.graph.adjacency[static_cast<size_t>(i)][static_cast<size_t>(i)] = true;
        for (int j = i + 1; j < nv; ++j) {
            const bool c = hilbert::commutes(model.variables[static_cast<size_t>(i)].projector.op(),
                                             model.variables[static_cast<size_t>(j)].projector.op());
            model.graph.adjacency[static_cast<size_t>(i)][static_cast<size_t>(j)] = c;
            model.graph.adjacency[static_cast<size_t>(j)][static_cast<size_t>(i)] = c;
        }
    }

    // Base-level commutation (complements commute exactly when bases do).
    const int nb = model.base_count;
    std::vector<std::vector<bool>> base_comm(static_cast<size_t>(nb),
                                             std::vector<bool>(static_cast<size_t>(nb), true));
    for (int a = 0; a < nb; ++a)
        for (int b = a + 1; b < nb; ++b) {
            const bool c = model.graph.edge(model.variable_for(a, false),
                                            model.variable_for(b, false));
            base_comm[static_cast<size_t>(a)][static_cast<size_t>(b)] = c;
            base_comm[static_cast<size_t>(b)][static_cast<size_t>(a)] = c;
        }

    // Enumerate commuting base subsets of size 1..max_subset, then every bit
    // pattern of each subset.
    std::vector<int> subset;
    auto emit = [&]() {
        const int k = static_cast<int>(subset.size());
        for (int bits = 0; bits < (1 << k); ++bits) {
            SubsetKey key;
            std::vector<Operator> factors;
            key.reserve(static_cast<size_t>(k));
            for (int s = 0; s < k; ++s) {
                const int bit = (bits >> s) & 1;
                const int base = subset[static_cast<size_t>(s)];
                key.emplace_back(base, bit);
                factors.push_back(
                    model.variables[static_cast<size_t>(model.variable_for(base, bit == 0))]
                        .projector.op());
            }
            const double p = hilbert::trace_product(rho, factors,
                                                    hilbert::RealityCheck::commuting_projectors);
            if (p < -hilbert::tol::validation || p > 1.0 + hilbert::tol::validation)
                throw OutOfRangeError("build_rvr: marginal outside [0, 1]");
            model.defined[key] = std::min(1.0, std::max(0.0, p));
        }
    };
    auto recurse = [&](auto&& self, int next) -> void {
        if (!subset.empty()) emit();
        if (static_cast<int>(subset.size()) == max_subset) return;
        for (int b = next; b < nb; ++b) {
            bool ok = true;
            for (int chosen : subset)
                if (!base_comm[static_cast<size_t>(chosen)][static_cast<size_t>(b)]) ok = false;
            if (!ok) continue;
            subset.push_back(b);
            self(self, b + 1);
            subset.pop_back();
        }
    };
    recurse(recurse, 0);

    // Marginal-consistency identity: dropping a variable from a defined
    // subset must reproduce the smaller marginal.
    for (const auto& [key, p] : model.defined) {
        if (key.size() < 2) continue;
        for (size_t drop = 0; drop < key.size(); ++drop) {
            SubsetKey smaller, flipped = key;
            for (size_t s = 0; s < key.size(); ++s)
                if (s != drop) smaller.push_back(key[s]);
            flipped[drop].second ^= 1;
            const double lhs = model.defined.at(smaller);
            const double rhs = p + model.defined.at(flipped);
            if (std::abs(lhs - rhs) > 1e-9)
                throw OutOfRangeError("build_rvr: marginal consistency violated");
        }
    }
    return model;
}

// -------------------------- marginal-instance views -------------------------

// One defined marginal as an LP row over the 2^n atoms of the base variables.
struct MarginalEntry {
    SubsetKey key;
    double value = 0.0;
};

inline std::vector<MarginalEntry> marginal_entries(const RvrModel& model) {
    std::vector<MarginalEntry> out;
    out.reserve(model.defined.size());
    for (const auto& [key, p] : model.defined) out.push_back({key, p});
    return out;
}

inline lp::LpProblem lp_problem_from_marginals(int base_count,
                                               const std::vector<MarginalEntry>& entries,
                                               double band) {
    if (base_count > 20) throw TooManyVariablesError("more than 20 base variables");
    const size_t atoms = static_cast<size_t>(1) << base_count;
    lp::LpProblem p;
    p.num_vars = static_cast<int>(atoms);
    lp::LpConstraint norm;
    norm.coeffs.assign(atoms, 1.0);
    norm.rhs = 1.0;
    norm.band = 0.0;
    p.rows.push_back(std::move(norm));
    for (const MarginalEntry& e : entries) {
        lp::LpConstraint c;
        c.coeffs.assign(atoms, 0.0);
        for (size_t atom = 0; atom < atoms; ++atom) {
            bool match = true;
            for (const auto& [base, bit] : e.key)
                if (((atom >> base) & 1) != static_cast<size_t>(bit)) match = false;
            if (match) c.coeffs[atom] = 1.0;
        }
        c.rhs = e.value;
        c.band = band;
        p.rows.push_back(std::move(c));
    }
    return p;
}

// Exact-hull view of the same instance: vertices are the deterministic
// assignments mapped to defined-marginal coordinates.
struct HullInstance {
    std::vector<std::vector<lp::Rational>> vertices;
    std::vector<lp::Rational> target;
};

inline HullInstance hull_instance_from_marginals(int base_count,
                                                 const std::vector<MarginalEntry>& entries) {
    if (base_count > 12) throw TooManyVariablesError("hull oracle limited to 2^12 vertices");
    HullInstance inst;
    const size_t atoms = static_cast<size_t>(1) << base_count;
    for (size_t atom = 0; atom < atoms; ++atom) {
        std::vector<lp::Rational> coords;
        coords.reserve(entries.size());
        for (const MarginalEntry& e : entries) {
            bool match = true;
            for (const auto& [base, bit] : e.key)
                if (((atom >> base) & 1) != static_cast<size_t>(bit)) match = false;
            coords.emplace_back(match ? 1 : 0);
        }
        inst.vertices.push_back(std::move(coords));
    }
    inst.target.reserve(entries.size());
    for (const MarginalEntry& e : entries) inst.target.push_back(lp::rationalize(e.value));
    return inst;
}

// ------------------------------- quadrilaterals ------------------------------

inline cprob::PairMarginals pair_marginals_from_model(const RvrModel& model) {
    const int nv = static_cast<int>(model.variables.size());
    std::vector<double> singles(static_cast<size_t>(nv));
    for (int v = 0; v < nv; ++v) singles[static_cast<size_t>(v)] = model.single_probability(v);
    std::map<std::pair<int, int>, double> pairs;
    for (int a = 0; a < nv; ++a)
        for (int b = a + 1; b < nv; ++b)
            if (const auto p = model.pair_probability(a, b)) pairs[{a, b}] = *p;
    return cprob::PairMarginals(nv, std::move(singles), std::move(pairs));
}

// Every admissible ordered quadruple (one representative of the within-pair
// relabeling symmetry), evaluated and sorted ascending by slack. Deterministic.
inline std::vector<QuadrilateralSlack> scan_quadrilaterals(const RvrModel& model) {
    const cprob::PairMarginals m = pair_marginals_from_model(model);
    const int nv = m.n;
    std::vector<QuadrilateralSlack> out;
    for (int a1 = 0; a1 < nv; ++a1)
        for (int b1 = a1 + 1; b1 < nv; ++b1)  // quad(a1,b1,b2,a2) == quad(b1,a1,a2,b2)
            for (int b2 = 0; b2 < nv; ++b2) {
                if (b2 == a1 || b2 == b1) continue;
                for (int a2 = 0; a2 < nv; ++a2) {
                    if (a2 == a1 || a2 == b1 || a2 == b2) continue;
                    if (!m.declared(a1, b1) || !m.declared(a1, b2) || !m.declared(b2, a2) ||
                        !m.declared(a2, b1))
                        continue;
                    out.push_back(
                        {{a1, b1, b2, a2}, cprob::quadrilateral_check(m, a1, b1, b2, a2)});
                }
            }
    std::stable_sort(out.begin(), out.end(), [](const QuadrilateralSlack& x,
                                                const QuadrilateralSlack& y) {
        if (x.slack != y.slack) return x.slack < y.slack;
        return x.variables < y.variables;
    });
    return out;
}

// ------------------------------- completeness --------------------------------

inline double witness_marginal(const cprob::JointTable& table, const SubsetKey& key) {
    std::vector<int> subset, values;
    for (const auto& [base, bit] : key) {
        subset.push_back(base);
        values.push_back(bit);
    }
    return cprob::marginal(table, subset, values);
}

// Decides whether one joint distribution has every defined marginal. Complete
// comes with a re-verified witness table; incomplete prefers the most-violated
// quadrilateral as its certificate and otherwise carries the LP dual.
inline FeasibilityResult completeness_lp(const RvrModel& model) {
    const std::vector<MarginalEntry> entries = marginal_entries(model);
    const lp::LpProblem problem = lp_problem_from_marginals(model.base_count, entries, 1e-9);
    const lp::LpOutcome lp_out = lp::solve_feasibility(problem);

    if (lp_out.status == lp::LpStatus::ambiguous)
        throw NumericallyAmbiguousError(
            "completeness LP landed in the numerical dead band (phase-1 objective " +
            std::to_string(lp_out.phase1_objective) + ")");

    FeasibilityResult result;
    result.phase1_objective = lp_out.phase1_objective;

    if (lp_out.status == lp::LpStatus::feasible) {
        result.status = FeasibilityResult::Status::complete;
        result.witness = cprob::JointTable::normalized(model.base_count, lp_out.point);
        for (const MarginalEntry& e : entries) {
            const double got = witness_marginal(result.witness, e.key);
            if (std::abs(got - e.value) > 1e-7)
                throw NumericallyAmbiguousError("witness fails to reproduce a defined marginal");
        }
        return result;
    }

    result.status = FeasibilityResult::Status::incomplete;
    const std::vector<QuadrilateralSlack> slacks = scan_quadrilaterals(model);
    if (!slacks.empty() && slacks.front().slack < -1e-7) {
        result.certificate.kind = FeasibilityCertificate::Kind::quadrilateral;
        result.certificate.quad = slacks.front();
        result.certificate.slack = slacks.front().slack;
    } else {
        result.certificate.kind = FeasibilityCertificate::Kind::lp_dual;
        result.certificate.dual_weights = lp_out.dual_weights;
        result.certificate.slack = -lp_out.certificate_margin;
    }
    return result;
}

// Kochen-Specker style witness: the most violated quadrilateral, if any. A
// returned certificate rules out every noncontextual hidden-variables model
// for this (state, projector set) pair.
inline std::optional<QuadrilateralSlack> kochen_specker_witness(const RvrModel& model) {
    const std::vector<QuadrilateralSlack> slacks = scan_quadrilaterals(model);
    if (!slacks.empty() && slacks.front().slack < -1e-7) return slacks.front();
    return std::nullopt;
}

}  // namespace qcorr::rvr
