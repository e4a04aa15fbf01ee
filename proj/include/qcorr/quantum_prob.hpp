// quantum_prob.hpp — probability distributions and expectations from
// (state, observable) pairs: spectral distributions, commuting joints, and
// the probability that a commuting projector subset takes the value 1.

#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "qcorr/operators.hpp"

namespace qcorr::qprob {

using hilbert::Complex;
using hilbert::DensityOperator;
using hilbert::Operator;
using hilbert::Projector;

// Probabilities in [-1e-12, 0) are rounding noise and clamp to zero; anything
// lower means the inputs broke a contract.
inline double clamp_probability(double p) {
    if (p < 0.0) {
        if (p < -1e-12) throw OutOfRangeError("negative probability beyond rounding noise");
        return 0.0;
    }
    return p;
}

struct DiscreteDistribution {
    std::vector<double> support;  // strictly ascending
    std::vector<double> weights;  // nonnegative, sum 1 within 1e-9

    void validate() const {
        if (support.size() != weights.size())
            throw DimensionMismatchError("distribution support/weight size mismatch");
        double sum = 0.0;
        for (size_t i = 0; i < support.size(); ++i) {
            if (i + 1 < support.size() && !(support[i] < support[i + 1]))
                throw OutOfRangeError("distribution support must be strictly ascending");
            if (weights[i] < 0.0) throw OutOfRangeError("distribution weight is negative");
            sum += weights[i];
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw OutOfRangeError("distribution weights do not sum to 1");
    }
};

// Joint distribution of finitely many commuting observables: one eigenvalue
// support per variable and a dense table over outcome tuples, indexed
// row-major with the last variable fastest.
struct CommutingJoint {
    std::vector<std::vector<double>> supports;
    std::vector<double> probs;

    int variable_count() const { return static_cast<int>(supports.size()); }

    size_t flat_index(const std::vector<int>& outcome) const {
        size_t idx = 0;
        for (size_t v = 0; v < supports.size(); ++v) {
            const int o = outcome[v];
            if (o < 0 || o >= static_cast<int>(supports[v].size()))
                throw BadIndexError("outcome index out of range");
            idx = idx * supports[v].size() + static_cast<size_t>(o);
        }
        return idx;
    }

    double at(const std::vector<int>& outcome) const { return probs[flat_index(outcome)]; }

    DiscreteDistribution marginal(int variable) const {
        if (variable < 0 || variable >= variable_count())
            throw BadIndexError("marginal variable out of range");
        DiscreteDistribution d;
        d.support = supports[static_cast<size_t>(variable)];
        d.weights.assign(d.support.size(), 0.0);
        std::vector<int> outcome(supports.size(), 0);
        for (size_t flat = 0; flat < probs.size(); ++flat) {
            size_t rem = flat;
            for (size_t v = supports.size(); v-- > 0;) {
                outcome[v] = static_cast<int>(rem % supports[v].size());
                rem /= supports[v].size();
            }
            d.weights[static_cast<size_t>(outcome[static_cast<size_t>(variable)])] +=
                probs[flat];
        }
        return d;
    }
};

// Spectral probability distribution of an observable in a state: the weight
// of each eigenvalue is Tr(rho P_j).
inline DiscreteDistribution observable_distribution(const DensityOperator& rho,
                                                    const Operator& a) {
    if (a.dim() != rho.dim())
        throw DimensionMismatchError("observable_distribution: dimension mismatch");
    const hilbert::SpectralDecomposition sd = hilbert::spectral_decompose(a);
    DiscreteDistribution d;
    d.support = sd.eigenvalues;
    d.weights.reserve(sd.eigenvalues.size());
    for (const Projector& p : sd.eigenprojectors)
        d.weights.push_back(clamp_probability(hilbert::trace_product(
            rho, {p.op()}, hilbert::RealityCheck::commuting_projectors)));
    d.validate();
    return d;
}

// Tr(rho p), clamped into [0, 1] when within the validation tolerance.
inline double projector_probability(const DensityOperator& rho, const Projector& p) {
    if (p.dim() != rho.dim())
        throw DimensionMismatchError("projector_probability: dimension mismatch");
    const double v = hilbert::trace_product(rho, {p.op()},
                                            hilbert::RealityCheck::commuting_projectors);
    if (v < -hilbert::tol::validation || v > 1.0 + hilbert::tol::validation)
        throw OutOfRangeError("projector probability outside [0, 1]");
    return std::min(1.0, std::max(0.0, v));
}

// Joint distribution of pairwise commuting observables: the probability of an
// outcome tuple is Tr(rho P Q ...) over the matching eigenprojectors.
inline CommutingJoint commuting_joint(const DensityOperator& rho,
                                      const std::vector<Operator>& observables) {
    for (size_t i = 0; i < observables.size(); ++i) {
        if (observables[i].dim() != rho.dim())
            throw DimensionMismatchError("commuting_joint: dimension mismatch");
        const double h = hilbert::hermiticity_residual(observables[i]);
        if (h > hilbert::tol::validation) throw NotHermitianError(h);
        for (size_t j = i + 1; j < observables.size(); ++j)
            if (!hilbert::commutes(observables[i], observables[j]))
                throw NotCommutingError(static_cast<int>(i), static_cast<int>(j));
    }

    std::vector<hilbert::SpectralDecomposition> sds;
    sds.reserve(observables.size());
    CommutingJoint joint;
    size_t cells = 1;
    for (const Operator& a : observables) {
        sds.push_back(hilbert::spectral_decompose(a));
        joint.supports.push_back(sds.back().eigenvalues);
        cells *= sds.back().eigenvalues.size();
    }
    joint.probs.assign(cells, 0.0);

    // Depth-first product accumulation over eigenprojector choices.
    std::vector<int> outcome(observables.size(), 0);
    auto recurse = [&](auto&& self, size_t depth, const Operator& acc) -> void {
        if (depth == observables.size()) {
            Complex t{};
            for (int i = 0; i < rho.dim(); ++i)
                for (int j = 0; j < rho.dim(); ++j) t += rho.op()(i, j) * acc(j, i);
            if (std::abs(t.imag()) > hilbert::tol::validation)
                throw NonRealResultError(t.imag());
            joint.probs[joint.flat_index(outcome)] = clamp_probability(t.real());
            return;
        }
        for (size_t k = 0; k < sds[depth].eigenprojectors.size(); ++k) {
            outcome[depth] = static_cast<int>(k);
            self(self, depth + 1,
                 depth == 0 ? sds[depth].eigenprojectors[k].op()
                            : hilbert::matmul(acc, sds[depth].eigenprojectors[k].op()));
        }
    };
    if (observables.empty()) {
        joint.probs.assign(1, 1.0);
        return joint;
    }
    recurse(recurse, 0, hilbert::identity(rho.dim()));

    double sum = 0.0;
    for (double p : joint.probs) sum += p;
    if (std::abs(sum - 1.0) > 1e-9) throw OutOfRangeError("joint probabilities do not sum to 1");
    return joint;
}

// Probability that every projector in the subset takes the value 1. The
// subset must be mutually commuting or the joint probability is undefined.
inline double marginal_probabilities(const DensityOperator& rho,
                                     const std::vector<Projector>& projectors,
                                     const std::vector<int>& subset) {
    std::vector<Operator> factors;
    factors.reserve(subset.size());
    for (size_t a = 0; a < subset.size(); ++a) {
        const int ia = subset[a];
        if (ia < 0 || ia >= static_cast<int>(projectors.size()))
            throw BadIndexError("marginal_probabilities: index out of range");
        for (size_t b = a + 1; b < subset.size(); ++b) {
            const int ib = subset[b];
            if (ib < 0 || ib >= static_cast<int>(projectors.size()))
                throw BadIndexError("marginal_probabilities: index out of range");
            if (!hilbert::commutes(projectors[static_cast<size_t>(ia)].op(),
                                   projectors[static_cast<size_t>(ib)].op()))
                throw NotCommutingError(ia, ib);
        }
        factors.push_back(projectors[static_cast<size_t>(ia)].op());
    }
    const double v =
        hilbert::trace_product(rho, factors, hilbert::RealityCheck::commuting_projectors);
    if (v < -hilbert::tol::validation || v > 1.0 + hilbert::tol::validation)
        throw OutOfRangeError("subset probability outside [0, 1]");
    return std::min(1.0, std::max(0.0, clamp_probability(v)));
}

// ----------------------- simultaneous eigenbasis helper ----------------------

// Orthonormal basis diagonalizing a whole commuting family at once, obtained
// by decomposing a fixed-seed random real combination and refining each
// degenerate block per operator.
struct SimultaneousEigenbasis {
    Operator vectors;                               // column k = shared eigenvector
    std::vector<std::vector<double>> eigenvalues;   // [operator][column]

    SimultaneousEigenbasis() : vectors(1) {}
};

inline SimultaneousEigenbasis simultaneous_eigenbasis(const std::vector<Operator>& family) {
    if (family.empty()) throw DimensionMismatchError("simultaneous_eigenbasis: empty family");
    const int n = family.front().dim();
    for (size_t i = 0; i < family.size(); ++i) {
        if (family[i].dim() != n)
            throw DimensionMismatchError("simultaneous_eigenbasis: dimension mismatch");
        for (size_t j = i + 1; j < family.size(); ++j)
            if (!hilbert::commutes(family[i], family[j]))
                throw NotCommutingError(static_cast<int>(i), static_cast<int>(j));
    }

    std::mt19937_64 rng(0x5eedbeefULL);
    std::uniform_real_distribution<double> u(0.25, 1.75);
    Operator mix(n);
    for (const Operator& a : family) mix = hilbert::add(mix, hilbert::scale(a, u(rng)));

    hilbert::EigenSystem es = hilbert::hermitian_eigensystem(mix);
    Operator basis = es.vectors;

    // Blocks of columns not yet known to be simultaneous eigenvectors.
    std::vector<std::pair<int, int>> blocks;
    {
        int start = 0;
        while (start < n) {
            int end = start + 1;
            while (end < n && es.eigenvalues[static_cast<size_t>(end)] -
                                      es.eigenvalues[static_cast<size_t>(end - 1)] <
                                  hilbert::tol::degeneracy_gap)
                ++end;
            blocks.emplace_back(start, end);
            start = end;
        }
    }

    for (const Operator& a : family) {
        std::vector<std::pair<int, int>> next_blocks;
        for (const auto& [lo, hi] : blocks) {
            const int w = hi - lo;
            if (w == 1) {
                next_blocks.emplace_back(lo, hi);
                continue;
            }
            // Restrict A to the block, diagonalize, rotate the columns.
            Operator restricted(w);
            for (int r = 0; r < w; ++r)
                for (int c = 0; c < w; ++c) {
                    Complex s{};
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            s += std::conj(basis(i, lo + r)) * a(i, j) * basis(j, lo + c);
                    restricted(r, c) = s;
                }
            const hilbert::EigenSystem sub = hilbert::hermitian_eigensystem(restricted);
            Operator rotated(n);
            for (int c = 0; c < w; ++c)
                for (int i = 0; i < n; ++i) {
                    Complex s{};
                    for (int r = 0; r < w; ++r) s += basis(i, lo + r) * sub.vectors(r, c);
                    rotated(i, c) = s;
                }
            for (int c = 0; c < w; ++c)
                for (int i = 0; i < n; ++i) basis(i, lo + c) = rotated(i, c);
            int s2 = 0;
            while (s2 < w) {
                int e2 = s2 + 1;
                while (e2 < w && sub.eigenvalues[static_cast<size_t>(e2)] -
                                         sub.eigenvalues[static_cast<size_t>(e2 - 1)] <
                                     hilbert::tol::degeneracy_gap)
                    ++e2;
                next_blocks.emplace_back(lo + s2, lo + e2);
                s2 = e2;
            }
        }
        blocks = std::move(next_blocks);
    }

    SimultaneousEigenbasis out;
    out.vectors = basis;
    out.eigenvalues.resize(family.size());
    for (size_t f = 0; f < family.size(); ++f) {
        out.eigenvalues[f].resize(static_cast<size_t>(n));
        for (int c = 0; c < n; ++c) {
            Complex s{};
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    s += std::conj(basis(i, c)) * family[f](i, j) * basis(j, c);
            out.eigenvalues[f][static_cast<size_t>(c)] = s.real();
        }
    }
    return out;
}

}  // namespace qcorr::qprob
