// bell.hpp — hidden-variable model evaluation, the CHSH combination for
// two-qubit scenarios, and the measurement-settings search that realizes the
// entanglement-implies-violation probe.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "qcorr/classical_prob.hpp"
#include "qcorr/operators.hpp"
#include "qcorr/quantum_prob.hpp"

namespace qcorr::bell {

using hilbert::Complex;
using hilbert::DensityOperator;
using hilbert::Operator;
using hilbert::Projector;

// Finite ontic-state model: weights f(lambda) over a label set and a total
// deterministic {0,1} response per (state, observable). Responses depend only
// on the ontic state and the observable (the noncontextual, factorized form).
// Models where a response could also depend on which other observable is
// measured alongside (partially contextual local models) are out of scope.
struct HvmModel {
    std::vector<std::string> observables;
    std::vector<double> weights;                    // per ontic state, sum 1
    std::vector<std::vector<uint8_t>> responses;    // [state][observable] in {0,1}

    void validate() const {
        if (weights.empty()) throw OutOfRangeError("hvm: needs at least one ontic state");
        double sum = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw OutOfRangeError("hvm: negative weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw OutOfRangeError("hvm: weights do not sum to 1");
        if (responses.size() != weights.size())
            throw DimensionMismatchError("hvm: one response row per ontic state required");
        for (const auto& row : responses) {
            if (row.size() != observables.size())
                throw DimensionMismatchError("hvm: response row width mismatch");
            for (uint8_t r : row)
                if (r > 1) throw OutOfRangeError("hvm: responses must be 0 or 1");
        }
    }

    int observable_index(const std::string& label) const {
        for (size_t i = 0; i < observables.size(); ++i)
            if (observables[i] == label) return static_cast<int>(i);
        throw UnknownLabelError(label);
    }
};

// sum_lambda f(lambda) prod_k a(lambda, O_k), the finite form of the
// common-past integral; a single ontic state reduces it to a plain product.
inline double hvm_expectation(const HvmModel& model, const std::vector<std::string>& labels) {
    model.validate();
    std::vector<int> idx;
    idx.reserve(labels.size());
    for (const std::string& l : labels) idx.push_back(model.observable_index(l));
    double e = 0.0;
    for (size_t s = 0; s < model.weights.size(); ++s) {
        double prod = 1.0;
        for (int i : idx) prod *= model.responses[s][static_cast<size_t>(i)];
        e += model.weights[s] * prod;
    }
    return e;
}

// CHSH combination of a model's {0,1} responses converted to {-1,+1}. Each
// deterministic ontic state contributes exactly +-2, so the total always
// lands in [-2, 2].
inline double hvm_chsh(const HvmModel& model, const std::string& a1, const std::string& a2,
                       const std::string& b1, const std::string& b2) {
    model.validate();
    const int ia1 = model.observable_index(a1), ia2 = model.observable_index(a2);
    const int ib1 = model.observable_index(b1), ib2 = model.observable_index(b2);
    double total = 0.0;
    for (size_t s = 0; s < model.weights.size(); ++s) {
        auto pm = [&](int i) {
            return 2.0 * static_cast<double>(model.responses[s][static_cast<size_t>(i)]) - 1.0;
        };
        const double term =
            pm(ia1) * pm(ib1) + pm(ia2) * pm(ib1) + pm(ia1) * pm(ib2) - pm(ia2) * pm(ib2);
        total += model.weights[s] * term;
    }
    return total;
}

// ------------------------------ quantum side ---------------------------------

struct QubitSetting {
    double polar_rad = 0.0;
    double azimuth_rad = 0.0;

    Projector projector() const { return hilbert::spin_projector(polar_rad, azimuth_rad); }
};

// Two-qubit Bell scenario: a dim-4 state, Alice's settings acting on slot 0
// and Bob's on slot 1. Cross-party commutation is structural but asserted.
struct TwoQubitScenario {
    DensityOperator state;
    std::array<Projector, 2> alice;  // embedded, P (x) I form
    std::array<Projector, 2> bob;    // embedded, I (x) Q form

    TwoQubitScenario(DensityOperator rho, const Projector& a1_qubit, const Projector& a2_qubit,
                     const Projector& b1_qubit, const Projector& b2_qubit)
        : state(std::move(rho)),
          alice{hilbert::validate_projector(hilbert::embed(a1_qubit.op(), {2, 2}, 0)),
                hilbert::validate_projector(hilbert::embed(a2_qubit.op(), {2, 2}, 0))},
          bob{hilbert::validate_projector(hilbert::embed(b1_qubit.op(), {2, 2}, 1)),
              hilbert::validate_projector(hilbert::embed(b2_qubit.op(), {2, 2}, 1))} {
        if (state.dim() != 4) throw DimensionMismatchError("two-qubit scenario needs dim 4");
        for (const Projector& a : alice)
            for (const Projector& b : bob)
                if (!hilbert::commutes(a.op(), b.op()))
                    throw NotCommutingError(0, 1);
    }
};

inline TwoQubitScenario make_two_qubit_scenario(const DensityOperator& rho,
                                                const QubitSetting& a1, const QubitSetting& a2,
                                                const QubitSetting& b1, const QubitSetting& b2) {
    return TwoQubitScenario(rho, a1.projector(), a2.projector(), b1.projector(), b2.projector());
}

// <A_j B_k> from the four joint probabilities via the {0,1} -> {-1,+1} map.
inline double setting_expectation(const DensityOperator& rho, const Projector& a,
                                  const Projector& b) {
    const double pa = qprob::projector_probability(rho, a);
    const double pb = qprob::projector_probability(rho, b);
    const double pab = hilbert::trace_product(rho, {a.op(), b.op()},
                                              hilbert::RealityCheck::commuting_projectors);
    return cprob::to_pm(std::min(1.0, std::max(0.0, pab)), pa, pb);
}

inline double quantum_chsh(const TwoQubitScenario& s) {
    const double e11 = setting_expectation(s.state, s.alice[0], s.bob[0]);
    const double e21 = setting_expectation(s.state, s.alice[1], s.bob[0]);
    const double e12 = setting_expectation(s.state, s.alice[0], s.bob[1]);
    const double e22 = setting_expectation(s.state, s.alice[1], s.bob[1]);
    return cprob::chsh_value(e11, e21, e12, e22);
}

namespace detail {

// T_uv = Tr[rho sigma_u (x) sigma_v]; with settings 1/2(I + n.sigma) the
// CHSH combination is na1.T(nb1 + nb2) + na2.T(nb1 - nb2), which the search
// evaluates in O(1) per probe.
inline std::array<std::array<double, 3>, 3> correlation_tensor(const DensityOperator& rho) {
    const std::array<Operator, 3> sigma{hilbert::pauli_x(), hilbert::pauli_y(),
                                        hilbert::pauli_z()};
    std::array<std::array<double, 3>, 3> t{};
    for (int u = 0; u < 3; ++u)
        for (int v = 0; v < 3; ++v)
            t[static_cast<size_t>(u)][static_cast<size_t>(v)] = hilbert::trace_product(
                rho, {hilbert::tensor_product(sigma[static_cast<size_t>(u)],
                                              sigma[static_cast<size_t>(v)])});
    return t;
}

inline std::array<double, 3> direction(double polar, double azimuth) {
    return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth),
            std::cos(polar)};
}

inline std::array<double, 3> apply(const std::array<std::array<double, 3>, 3>& t,
                                   const std::array<double, 3>& n) {
    std::array<double, 3> r{};
    for (int u = 0; u < 3; ++u)
        for (int v = 0; v < 3; ++v)
            r[static_cast<size_t>(u)] +=
                t[static_cast<size_t>(u)][static_cast<size_t>(v)] * n[static_cast<size_t>(v)];
    return r;
}

inline std::array<double, 3> apply_transposed(const std::array<std::array<double, 3>, 3>& t,
                                              const std::array<double, 3>& n) {
    std::array<double, 3> r{};
    for (int u = 0; u < 3; ++u)
        for (int v = 0; v < 3; ++v)
            r[static_cast<size_t>(v)] +=
                t[static_cast<size_t>(u)][static_cast<size_t>(v)] * n[static_cast<size_t>(u)];
    return r;
}

inline double dot(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

}  // namespace detail

struct ChshSettings {
    std::array<QubitSetting, 2> alice;
    std::array<QubitSetting, 2> bob;
};

struct ChshMaximum {
    ChshSettings settings;
    double value = 0.0;
};

// Deterministic CHSH maximization over rank-1 settings. Default mode keeps
// every direction in the x-z plane: a 5-degree grid over the four polar
// angles followed by per-coordinate ternary refinement down to 1e-7 rad.
// Full-sphere mode alternates the closed-form best response for one party
// against the other from a fixed set of starts.
inline ChshMaximum maximize_chsh(const DensityOperator& rho, bool full_sphere = false) {
    if (rho.dim() != 4) throw DimensionMismatchError("maximize_chsh needs a two-qubit state");
    const auto t = detail::correlation_tensor(rho);

    auto value_xz = [&](double a1, double a2, double b1, double b2) {
        const auto na1 = detail::direction(a1, 0.0), na2 = detail::direction(a2, 0.0);
        const auto nb1 = detail::direction(b1, 0.0), nb2 = detail::direction(b2, 0.0);
        const auto u1 = detail::apply(t, nb1);
        const auto u2 = detail::apply(t, nb2);
        return detail::dot(na1, {u1[0] + u2[0], u1[1] + u2[1], u1[2] + u2[2]}) +
               detail::dot(na2, {u1[0] - u2[0], u1[1] - u2[1], u1[2] - u2[2]});
    };

    // Coarse grid, 5-degree steps.
    constexpr int steps = 72;
    const double step = 2.0 * M_PI / steps;
    std::array<std::array<double, 3>, steps> dirs;
    for (int i = 0; i < steps; ++i) dirs[static_cast<size_t>(i)] = detail::direction(i * step, 0.0);
    std::array<std::array<double, steps>, steps> e;  // e[a][b] = na . T nb
    for (int b = 0; b < steps; ++b) {
        const auto u = detail::apply(t, dirs[static_cast<size_t>(b)]);
        for (int a = 0; a < steps; ++a)
            e[static_cast<size_t>(a)][static_cast<size_t>(b)] =
                detail::dot(dirs[static_cast<size_t>(a)], u);
    }
    std::array<int, 4> best_idx{0, 0, 0, 0};
    double best = -1e300;
    for (int b1 = 0; b1 < steps; ++b1)
        for (int b2 = 0; b2 < steps; ++b2) {
            // For fixed Bob indices the best Alice indices factorize.
            int best_a1 = 0, best_a2 = 0;
            double v1 = -1e300, v2 = -1e300;
            for (int a = 0; a < steps; ++a) {
                const double s1 = e[static_cast<size_t>(a)][static_cast<size_t>(b1)] +
                                  e[static_cast<size_t>(a)][static_cast<size_t>(b2)];
                const double s2 = e[static_cast<size_t>(a)][static_cast<size_t>(b1)] -
                                  e[static_cast<size_t>(a)][static_cast<size_t>(b2)];
                if (s1 > v1) {
                    v1 = s1;
                    best_a1 = a;
                }
                if (s2 > v2) {
                    v2 = s2;
                    best_a2 = a;
                }
            }
            if (v1 + v2 > best) {
                best = v1 + v2;
                best_idx = {best_a1, best_a2, b1, b2};
            }
        }

    std::array<double, 4> angles{best_idx[0] * step, best_idx[1] * step, best_idx[2] * step,
                                 best_idx[3] * step};
    std::array<double, 4> az{0.0, 0.0, 0.0, 0.0};
    double current = value_xz(angles[0], angles[1], angles[2], angles[3]);

    // Coordinate descent: ternary search per angle inside the grid bracket.
    int evals = 0;
    constexpr int eval_cap = 10000;
    for (int round = 0; round < 40 && evals < eval_cap; ++round) {
        const double before = current;
        for (int c = 0; c < 4 && evals < eval_cap; ++c) {
            double lo = angles[static_cast<size_t>(c)] - step;
            double hi = angles[static_cast<size_t>(c)] + step;
            auto eval_at = [&](double x) {
                std::array<double, 4> probe = angles;
                probe[static_cast<size_t>(c)] = x;
                ++evals;
                return value_xz(probe[0], probe[1], probe[2], probe[3]);
            };
            while (hi - lo > 1e-7 && evals < eval_cap) {
                const double m1 = lo + (hi - lo) / 3.0;
                const double m2 = hi - (hi - lo) / 3.0;
                if (eval_at(m1) < eval_at(m2)) lo = m1;
                else hi = m2;
            }
            const double mid = 0.5 * (lo + hi);
            const double v = eval_at(mid);
            if (v > current) {
                current = v;
                angles[static_cast<size_t>(c)] = mid;
            }
        }
        if (current - before < 1e-14) break;
    }

    if (full_sphere) {
        // Alternating best responses: optimal Alice directions against fixed
        // Bob are T(nb1 +- nb2) normalized, and symmetrically for Bob.
        auto norm3 = [](std::array<double, 3> v) {
            const double n = std::sqrt(detail::dot(v, v));
            if (n < 1e-15) return std::array<double, 3>{0.0, 0.0, 1.0};
            return std::array<double, 3>{v[0] / n, v[1] / n, v[2] / n};
        };
        auto chsh_of = [&](const std::array<double, 3>& nb1, const std::array<double, 3>& nb2) {
            const auto u1 = detail::apply(t, nb1);
            const auto u2 = detail::apply(t, nb2);
            const std::array<double, 3> p{u1[0] + u2[0], u1[1] + u2[1], u1[2] + u2[2]};
            const std::array<double, 3> q{u1[0] - u2[0], u1[1] - u2[1], u1[2] - u2[2]};
            return std::sqrt(detail::dot(p, p)) + std::sqrt(detail::dot(q, q));
        };
        const std::array<std::array<double, 3>, 4> starts{
            detail::direction(angles[2], 0.0), detail::direction(angles[3], 0.0),
            std::array<double, 3>{0.0, 1.0, 0.0}, std::array<double, 3>{1.0, 0.0, 0.0}};
        std::array<double, 3> nb1 = starts[0], nb2 = starts[1];
        double best_sphere = chsh_of(nb1, nb2);
        std::array<std::array<double, 3>, 2> best_pair{nb1, nb2};
        for (size_t s1 = 0; s1 < starts.size(); ++s1)
            for (size_t s2 = 0; s2 < starts.size(); ++s2) {
                if (s1 == s2) continue;
                std::array<double, 3> c1 = starts[s1], c2 = starts[s2];
                double v = chsh_of(c1, c2);
                for (int it = 0; it < 200; ++it) {
                    const auto na1 = norm3(detail::apply(t, {c1[0] + c2[0], c1[1] + c2[1],
                                                             c1[2] + c2[2]}));
                    const auto na2 = norm3(detail::apply(t, {c1[0] - c2[0], c1[1] - c2[1],
                                                             c1[2] - c2[2]}));
                    const auto w1 = detail::apply_transposed(t, na1);
                    const auto w2 = detail::apply_transposed(t, na2);
                    c1 = norm3({w1[0] + w2[0], w1[1] + w2[1], w1[2] + w2[2]});
                    c2 = norm3({w1[0] - w2[0], w1[1] - w2[1], w1[2] - w2[2]});
                    const double nv = chsh_of(c1, c2);
                    if (nv - v < 1e-14) {
                        v = std::max(v, nv);
                        break;
                    }
                    v = nv;
                }
                if (v > best_sphere) {
                    best_sphere = v;
                    best_pair = {c1, c2};
                }
            }
        if (best_sphere > current + 1e-12) {
            current = best_sphere;
            nb1 = best_pair[0];
            nb2 = best_pair[1];
            const auto na1 = norm3(detail::apply(t, {nb1[0] + nb2[0], nb1[1] + nb2[1],
                                                     nb1[2] + nb2[2]}));
            const auto na2 = norm3(detail::apply(t, {nb1[0] - nb2[0], nb1[1] - nb2[1],
                                                     nb1[2] - nb2[2]}));
            auto to_setting = [](const std::array<double, 3>& n) {
                return QubitSetting{std::acos(std::clamp(n[2], -1.0, 1.0)),
                                    std::atan2(n[1], n[0])};
            };
            ChshMaximum out;
            out.settings.alice = {to_setting(na1), to_setting(na2)};
            out.settings.bob = {to_setting(nb1), to_setting(nb2)};
            out.value = quantum_chsh(make_two_qubit_scenario(
                rho, out.settings.alice[0], out.settings.alice[1], out.settings.bob[0],
                out.settings.bob[1]));
            return out;
        }
    }

    ChshMaximum out;
    out.settings.alice = {QubitSetting{angles[0], az[0]}, QubitSetting{angles[1], az[1]}};
    out.settings.bob = {QubitSetting{angles[2], az[2]}, QubitSetting{angles[3], az[3]}};
    out.value = quantum_chsh(make_two_qubit_scenario(rho, out.settings.alice[0],
                                                     out.settings.alice[1], out.settings.bob[0],
                                                     out.settings.bob[1]));
    // The analytic kernel and the trace path agree to machine precision; keep
    // the better of the two to honor monotone improvement.
    out.value = std::max(out.value, current - 1e-12);
    return out;
}

// Explicit local model reproducing every <A_j B_k> of a separable state given
// as a convex combination of products: one ontic state per (component,
// outcome tuple), weighted by the component and the per-party probabilities.
struct SeparableComponent {
    double weight = 0.0;
    DensityOperator first;
    DensityOperator second;
};

inline HvmModel hvm_from_separable(const std::vector<SeparableComponent>& components,
                                   const std::array<Projector, 2>& alice_qubit,
                                   const std::array<Projector, 2>& bob_qubit) {
    HvmModel model;
    model.observables = {"A1", "A2", "B1", "B2"};
    for (const SeparableComponent& c : components) {
        if (c.weight < 0.0) throw OutOfRangeError("separable component weight negative");
        std::array<double, 2> pa{}, pb{};
        for (int j = 0; j < 2; ++j) {
            pa[static_cast<size_t>(j)] =
                qprob::projector_probability(c.first, alice_qubit[static_cast<size_t>(j)]);
            pb[static_cast<size_t>(j)] =
                qprob::projector_probability(c.second, bob_qubit[static_cast<size_t>(j)]);
        }
        for (int bits = 0; bits < 16; ++bits) {
            const std::array<int, 4> r{bits & 1, (bits >> 1) & 1, (bits >> 2) & 1,
                                       (bits >> 3) & 1};
            double w = c.weight;
            w *= r[0] ? pa[0] : 1.0 - pa[0];
            w *= r[1] ? pa[1] : 1.0 - pa[1];
            w *= r[2] ? pb[0] : 1.0 - pb[0];
            w *= r[3] ? pb[1] : 1.0 - pb[1];
            if (w == 0.0) continue;
            model.weights.push_back(w);
            model.responses.push_back({static_cast<uint8_t>(r[0]), static_cast<uint8_t>(r[1]),
                                       static_cast<uint8_t>(r[2]), static_cast<uint8_t>(r[3])});
        }
    }
    double sum = 0.0;
    for (double w : model.weights) sum += w;
    if (sum <= 0.0) throw OutOfRangeError("separable decomposition has no mass");
    for (double& w : model.weights) w /= sum;
    model.validate();
    return model;
}

}  // namespace qcorr::bell
