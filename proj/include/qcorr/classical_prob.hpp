// classical_prob.hpp — joint tables over dichotomic variables, the distance
// function and its triangle/quadrilateral inequalities, CH/CHSH algebra,
// statistical correlation, and Shannon entropy.

#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "qcorr/errors.hpp"

namespace qcorr::cprob {

// Probability distribution over {0,1}^n atoms. Variable j's value is bit j of
// the atom index (little-endian); this layout is part of the file format.
struct JointTable {
    int n = 0;
    std::vector<double> probs;  // size 2^n

    JointTable() = default;
    JointTable(int vars, std::vector<double> p) : n(vars), probs(std::move(p)) { validate(); }

    void validate() const {
        if (n < 0 || n > 26) throw OutOfRangeError("joint table variable count out of range");
        if (probs.size() != (static_cast<size_t>(1) << n))
            throw DimensionMismatchError("joint table has wrong atom count");
        double sum = 0.0;
        for (double p : probs) {
            if (p < 0.0) throw OutOfRangeError("joint table atom is negative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw OutOfRangeError("joint table does not sum to 1");
    }

    static JointTable normalized(int vars, std::vector<double> raw) {
        double sum = 0.0;
        for (double& p : raw) {
            if (p < 0.0 && p >= -1e-12) p = 0.0;
            sum += p;
        }
        if (sum <= 0.0) throw OutOfRangeError("joint table has no mass");
        for (double& p : raw) p /= sum;
        return JointTable(vars, std::move(raw));
    }
};

// Sum of atoms matching the given bits on the subset.
inline double marginal(const JointTable& table, const std::vector<int>& subset,
                       const std::vector<int>& values) {
    if (subset.size() != values.size())
        throw DimensionMismatchError("marginal: subset/value size mismatch");
    uint32_t mask = 0, want = 0;
    for (size_t s = 0; s < subset.size(); ++s) {
        const int j = subset[s];
        if (j < 0 || j >= table.n) throw BadIndexError("marginal: variable index out of range");
        if (mask & (1u << j)) throw BadIndexError("marginal: repeated variable index");
        mask |= 1u << j;
        if (values[s]) want |= 1u << j;
    }
    double sum = 0.0;
    for (size_t atom = 0; atom < table.probs.size(); ++atom)
        if ((static_cast<uint32_t>(atom) & mask) == want) sum += table.probs[atom];
    return sum;
}

// Marginal distribution as a table over the subset (subset order = new order).
inline JointTable marginal_table(const JointTable& table, const std::vector<int>& subset) {
    const int m = static_cast<int>(subset.size());
    for (int j : subset)
        if (j < 0 || j >= table.n) throw BadIndexError("marginal_table: index out of range");
    std::vector<double> out(static_cast<size_t>(1) << m, 0.0);
    for (size_t atom = 0; atom < table.probs.size(); ++atom) {
        uint32_t to = 0;
        for (int s = 0; s < m; ++s)
            if (atom & (1u << subset[static_cast<size_t>(s)])) to |= 1u << s;
        out[to] += table.probs[atom];
    }
    return JointTable(m, std::move(out));
}

// Declared single and pair probabilities; pairs absent from the declaration
// have no joint probability and any use of them is an error.
struct PairMarginals {
    int n = 0;
    std::vector<double> singles;                 // p1(a_j)
    std::map<std::pair<int, int>, double> pairs; // key (min, max) -> p2(a_j a_k)

    PairMarginals() = default;
    PairMarginals(int vars, std::vector<double> p1,
                  std::map<std::pair<int, int>, double> p2)
        : n(vars), singles(std::move(p1)), pairs(std::move(p2)) {
        validate();
    }

    void validate() const {
        if (static_cast<int>(singles.size()) != n)
            throw DimensionMismatchError("pair marginals: wrong single count");
        for (double p : singles)
            if (p < -1e-12 || p > 1.0 + 1e-12)
                throw OutOfRangeError("single probability outside [0, 1]");
        for (const auto& [key, p] : pairs) {
            const auto [j, k] = key;
            if (j < 0 || k < 0 || j >= n || k >= n || j >= k)
                throw BadIndexError("pair marginals: bad pair key");
            const double pj = singles[static_cast<size_t>(j)];
            const double pk = singles[static_cast<size_t>(k)];
            if (p < -1e-12 || p > std::min(pj, pk) + 1e-12)
                throw OutOfRangeError("pair probability violates upper Frechet bound");
            if (p < pj + pk - 1.0 - 1e-12)
                throw OutOfRangeError("pair probability violates lower Frechet bound");
        }
    }

    bool declared(int j, int k) const {
        if (j == k) return true;
        return pairs.count({std::min(j, k), std::max(j, k)}) > 0;
    }

    double pair(int j, int k) const {
        if (j == k) return singles[static_cast<size_t>(j)];
        const auto it = pairs.find({std::min(j, k), std::max(j, k)});
        if (it == pairs.end()) throw UndeclaredPairError(j, k);
        return it->second;
    }

    double single(int j) const {
        if (j < 0 || j >= n) throw BadIndexError("single index out of range");
        return singles[static_cast<size_t>(j)];
    }
};

// All singles plus every unordered pair, extracted from a genuine table.
inline PairMarginals pair_marginals_from_table(const JointTable& table) {
    std::vector<double> singles(static_cast<size_t>(table.n));
    for (int j = 0; j < table.n; ++j) singles[static_cast<size_t>(j)] = marginal(table, {j}, {1});
    std::map<std::pair<int, int>, double> pairs;
    for (int j = 0; j < table.n; ++j)
        for (int k = j + 1; k < table.n; ++k)
            pairs[{j, k}] = marginal(table, {j, k}, {1, 1});
    return PairMarginals(table.n, std::move(singles), std::move(pairs));
}

// d(a_j, a_k) = p1(a_j) + p1(a_k) - 2 p2(a_j a_k): the probability that the
// two variables disagree. Zero iff maximally correlated, one iff maximally
// anticorrelated.
inline double distance(const PairMarginals& m, int j, int k) {
    if (j < 0 || j >= m.n || k < 0 || k >= m.n)
        throw BadIndexError("distance: variable index out of range");
    if (j == k) return 0.0;
    if (!m.declared(j, k)) throw UndeclaredPairError(j, k);
    const double d = m.single(j) + m.single(k) - 2.0 * m.pair(j, k);
    if (d < -1e-12 || d > 1.0 + 1e-12)
        throw OutOfRangeError("distance outside [0, 1] beyond rounding");
    return std::min(1.0, std::max(0.0, d));
}

// Slack of d(j,l) <= d(j,k) + d(k,l); nonnegative means satisfied.
inline double triangle_check(const PairMarginals& m, int j, int k, int l) {
    return distance(m, j, k) + distance(m, k, l) - distance(m, j, l);
}

// Slack of d(a1,b1) <= d(a1,b2) + d(b2,a2) + d(a2,b1); nonnegative means
// satisfied. Only the four cross pairs need declared joints; that is the
// point of the inequality.
inline double quadrilateral_check(const PairMarginals& m, int a1, int b1, int b2, int a2) {
    return distance(m, a1, b2) + distance(m, b2, a2) + distance(m, a2, b1) -
           distance(m, a1, b1);
}

// Clauser-Horne slack p(a1) + p(b1) - p(a1b1) - p(a2b1) - p(a1b2) + p(a2b2);
// nonnegative means satisfied. Equals quadrilateral_check(m, a2, b2, b1, a1)/2,
// the same four variables with both parties' settings swapped.
inline double ch_value(const PairMarginals& m, int a1, int a2, int b1, int b2) {
    return m.single(a1) + m.single(b1) - m.pair(a1, b1) - m.pair(a2, b1) -
           m.pair(a1, b2) + m.pair(a2, b2);
}

inline void check_probability_range(double p, const char* what) {
    if (p < -1e-9 || p > 1.0 + 1e-9) throw OutOfRangeError(std::string(what) + " outside [0, 1]");
}

// {0,1} -> {-1,+1} conversion: <A> = 2 p(a) - 1.
inline double to_pm(double p_a) {
    check_probability_range(p_a, "probability");
    return 2.0 * p_a - 1.0;
}

// Pair version: <AB> = 4 p(ab) - 2 p(a) - 2 p(b) + 1.
inline double to_pm(double p_ab, double p_a, double p_b) {
    check_probability_range(p_ab, "pair probability");
    check_probability_range(p_a, "probability");
    check_probability_range(p_b, "probability");
    return 4.0 * p_ab - 2.0 * p_a - 2.0 * p_b + 1.0;
}

// <A1B1> + <A2B1> + <A1B2> - <A2B2>; at most 2 for complete representations,
// at most 4 outright.
inline double chsh_value(double e11, double e21, double e12, double e22) {
    for (double e : {e11, e21, e12, e22})
        if (e < -1.0 - 1e-9 || e > 1.0 + 1e-9)
            throw OutOfRangeError("expectation outside [-1, 1]");
    return e11 + e21 + e12 - e22;
}

// Dimensionless statistical correlation (<AB> - <A><B>) / (sigma_A sigma_B).
inline double correlation(double mean_a, double mean_b, double mean_a2, double mean_b2,
                          double mean_ab) {
    const double var_a = mean_a2 - mean_a * mean_a;
    const double var_b = mean_b2 - mean_b * mean_b;
    if (var_a <= 1e-12 || var_b <= 1e-12) throw ZeroVarianceError();
    return (mean_ab - mean_a * mean_b) / (std::sqrt(var_a) * std::sqrt(var_b));
}

// Shannon entropy in nats, 0 log 0 = 0.
inline double shannon_entropy(const JointTable& table) {
    double s = 0.0;
    for (double p : table.probs)
        if (p > 0.0) s -= p * std::log(p);
    return std::max(0.0, s);
}

// ------------------- CHSH with correlation substituted in -------------------

// The CHSH combination with Corr(A,B) substituted for <AB>. Variables are
// bits (a1, a2, b1, b2) = (0, 1, 2, 3) of a 16-atom table. Classical tables
// can push this beyond 2, which is exactly why the substitution is unsound.
inline double corr_chsh_combination(const JointTable& table) {
    if (table.n != 4) throw DimensionMismatchError("corr_chsh_combination needs 4 variables");
    auto mean = [&](int j) { return to_pm(marginal(table, {j}, {1})); };
    auto mean_pair = [&](int j, int k) {
        return to_pm(marginal(table, {j, k}, {1, 1}), marginal(table, {j}, {1}),
                     marginal(table, {k}, {1}));
    };
    auto corr = [&](int j, int k) {
        return correlation(mean(j), mean(k), 1.0, 1.0, mean_pair(j, k));
    };
    return corr(0, 2) + corr(1, 2) + corr(0, 3) - corr(1, 3);
}

namespace detail {

// Deterministic samplers pinned to explicit algorithms so seeded searches
// replay identically on any platform (std distributions are not portable).
inline double uniform01(std::mt19937_64& rng) {
    return std::ldexp(static_cast<double>(rng()), -64);
}

inline double normal01(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    while (u1 <= 0.0) u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

// Marsaglia-Tsang, with the alpha < 1 boost.
inline double gamma_sample(std::mt19937_64& rng, double alpha) {
    if (alpha < 1.0) {
        const double u = uniform01(rng);
        return gamma_sample(rng, alpha + 1.0) * std::pow(u > 0.0 ? u : 1e-300, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal01(rng);
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = uniform01(rng);
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

}  // namespace detail

struct CorrChshSearchResult {
    bool found = false;
    JointTable table;
    double value = 0.0;
    int attempts_used = 0;
};

// Seeded random search for a classical table whose Corr-substituted CHSH
// combination exceeds the threshold. Draws Dirichlet(alpha) tables with alpha
// swept small (biased, spiky marginals), skipping degenerate draws. The
// exploration behind this: the classical maximum of the combination is 2.5,
// reached by three equal-weight atoms with Corr(A2,B2) = -1.
inline CorrChshSearchResult search_corr_chsh_table(uint64_t seed, int max_attempts,
                                                   double threshold) {
    std::mt19937_64 rng(seed);
    CorrChshSearchResult best;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        const double alpha = 0.02 + 0.48 * detail::uniform01(rng);
        std::vector<double> raw(16);
        double sum = 0.0;
        for (double& x : raw) {
            x = detail::gamma_sample(rng, alpha);
            sum += x;
        }
        if (sum <= 0.0) continue;
        for (double& x : raw) x /= sum;
        JointTable table;
        double value;
        try {
            table = JointTable::normalized(4, raw);
            value = corr_chsh_combination(table);
        } catch (const ZeroVarianceError&) {
            continue;
        } catch (const OutOfRangeError&) {
            continue;
        }
        if (!best.found || value > best.value) {
            best.table = table;
            best.value = value;
            best.found = true;
            best.attempts_used = attempt;
        }
        if (best.value > threshold) {
            best.attempts_used = attempt;
            return best;
        }
    }
    best.found = best.found && best.value > threshold;
    return best;
}

}  // namespace qcorr::cprob
