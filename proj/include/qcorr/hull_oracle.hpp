// hull_oracle.hpp — exact rational convex-hull membership: decides whether a
// target vector is a convex combination of given vertices, returning either
// the combination weights or a separating hyperplane. Pure phase-1 simplex
// over exact rationals; the trusted referee for the floating-point solver.

#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "qcorr/errors.hpp"

namespace qcorr::lp {

using Rational = boost::multiprecision::cpp_rational;

struct HullMembership {
    bool is_member = false;
    std::vector<Rational> weights;          // member: convex coefficients per vertex
    std::vector<Rational> separator;        // non-member: hyperplane normal g
    Rational separator_bound = 0;           // max_v g.v  (exact)
    Rational target_value = 0;              // g.t > separator_bound when separated
};

// Continued-fraction rationalization with bounded denominator; the float
// production path and the exact oracle meet through this.
inline Rational rationalize(double x, uint64_t max_denominator = 1000000000000ULL) {
    if (!std::isfinite(x)) throw OutOfRangeError("cannot rationalize a non-finite value");
    const bool neg = x < 0.0;
    double v = neg ? -x : x;
    uint64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int iter = 0; iter < 64; ++iter) {
        const double fl = std::floor(v);
        if (fl > 9e18) break;
        const uint64_t a = static_cast<uint64_t>(fl);
        if (q0 > 0 && a > (max_denominator - q0) / (q1 > 0 ? q1 : 1)) break;
        const uint64_t p2 = a * p1 + p0;
        const uint64_t q2 = a * q1 + q0;
        if (q2 > max_denominator) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        const double frac = v - fl;
        if (frac < 1e-15) break;
        v = 1.0 / frac;
    }
    Rational r(p1, q1 == 0 ? 1 : q1);
    return neg ? -r : r;
}

namespace detail {

// Dense exact simplex tableau for min(sum of artificials) over {Ax = b, x>=0}
// with b >= 0 and an all-artificial starting basis.
class ExactPhase1 {
public:
    ExactPhase1(const std::vector<std::vector<Rational>>& a, const std::vector<Rational>& b)
        : rows_(static_cast<int>(a.size())), cols_(a.empty() ? 0 : static_cast<int>(a[0].size())) {
        t_.assign(static_cast<size_t>(rows_ + 1) * (cols_ + rows_ + 1), Rational(0));
        basis_.resize(static_cast<size_t>(rows_));
        for (int r = 0; r < rows_; ++r) {
            const bool flip = b[static_cast<size_t>(r)] < 0;
            for (int c = 0; c < cols_; ++c)
                at(r, c) = flip ? -a[static_cast<size_t>(r)][static_cast<size_t>(c)]
                                : a[static_cast<size_t>(r)][static_cast<size_t>(c)];
            at(r, cols_ + r) = 1;
            at(r, width()) = flip ? -b[static_cast<size_t>(r)] : b[static_cast<size_t>(r)];
            basis_[static_cast<size_t>(r)] = cols_ + r;
        }
        // Cost row: c_j - sum of rows for the artificial basis (c = 1 there).
        for (int c = 0; c <= width(); ++c) {
            Rational s(0);
            for (int r = 0; r < rows_; ++r) s += at(r, c);
            at(rows_, c) = -s;
        }
        for (int r = 0; r < rows_; ++r) at(rows_, cols_ + r) = 0;
    }

    void solve() {
        for (;;) {
            int enter = -1;
            for (int c = 0; c < width(); ++c)
                if (at(rows_, c) < 0) {
                    enter = c;
                    break;
                }
            if (enter < 0) return;
            int leave = -1;
            Rational best(0);
            for (int r = 0; r < rows_; ++r) {
                if (at(r, enter) <= 0) continue;
                const Rational ratio = at(r, width()) / at(r, enter);
                if (leave < 0 || ratio < best ||
                    (ratio == best &&
                     basis_[static_cast<size_t>(r)] < basis_[static_cast<size_t>(leave)])) {
                    leave = r;
                    best = ratio;
                }
            }
            if (leave < 0) throw Error("exact simplex: unbounded phase 1 (internal)");
            pivot(leave, enter);
        }
    }

    Rational objective() const {
        Rational s(0);
        for (int r = 0; r < rows_; ++r)
            if (basis_[static_cast<size_t>(r)] >= cols_) s += at(r, width());
        return s;
    }

    std::vector<Rational> primal() const {
        std::vector<Rational> x(static_cast<size_t>(cols_), Rational(0));
        for (int r = 0; r < rows_; ++r)
            if (basis_[static_cast<size_t>(r)] < cols_)
                x[static_cast<size_t>(basis_[static_cast<size_t>(r)])] = at(r, width());
        return x;
    }

    // pi_r = 1 - reduced cost of artificial r (its column is e_r, cost 1),
    // mapped back through the row sign flips applied at setup.
    std::vector<Rational> duals(const std::vector<Rational>& original_b) const {
        std::vector<Rational> pi(static_cast<size_t>(rows_));
        for (int r = 0; r < rows_; ++r) {
            Rational v = Rational(1) - at(rows_, cols_ + r);
            if (original_b[static_cast<size_t>(r)] < 0) v = -v;
            pi[static_cast<size_t>(r)] = v;
        }
        return pi;
    }

private:
    int width() const { return cols_ + rows_; }
    Rational& at(int r, int c) { return t_[static_cast<size_t>(r) * (width() + 1) + c]; }
    const Rational& at(int r, int c) const {
        return t_[static_cast<size_t>(r) * (width() + 1) + c];
    }

    void pivot(int pr, int pc) {
        const Rational pv = at(pr, pc);
        for (int c = 0; c <= width(); ++c) at(pr, c) /= pv;
        for (int r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            const Rational f = at(r, pc);
            if (f == 0) continue;
            for (int c = 0; c <= width(); ++c) at(r, c) -= f * at(pr, c);
        }
        basis_[static_cast<size_t>(pr)] = pc;
    }

    int rows_, cols_;
    std::vector<Rational> t_;
    std::vector<int> basis_;
};

}  // namespace detail

// Decides target in conv(vertices) exactly. The feasibility system is
// sum_v w_v vertex_v = target, sum_v w_v = 1, w >= 0; an infeasibility dual
// (pi, pi0) yields the separating hyperplane g = pi with
// g.vertex + pi0 <= 0 < g.target + pi0 for every vertex.
inline HullMembership hull_membership_oracle(const std::vector<std::vector<Rational>>& vertices,
                                             const std::vector<Rational>& target) {
    if (vertices.empty()) throw DimensionMismatchError("hull oracle: no vertices");
    if (vertices.size() > 4096) throw OutOfRangeError("hull oracle: too many vertices");
    const size_t d = target.size();
    for (const auto& v : vertices)
        if (v.size() != d) throw DimensionMismatchError("hull oracle: vertex width mismatch");

    const int rows = static_cast<int>(d) + 1;
    const int nv = static_cast<int>(vertices.size());
    std::vector<std::vector<Rational>> a(static_cast<size_t>(rows),
                                         std::vector<Rational>(static_cast<size_t>(nv)));
    std::vector<Rational> b(static_cast<size_t>(rows));
    for (size_t r = 0; r < d; ++r) {
        for (int v = 0; v < nv; ++v) a[r][static_cast<size_t>(v)] = vertices[static_cast<size_t>(v)][r];
        b[r] = target[r];
    }
    for (int v = 0; v < nv; ++v) a[d][static_cast<size_t>(v)] = 1;
    b[d] = 1;

    detail::ExactPhase1 simplex(a, b);
    simplex.solve();

    HullMembership out;
    if (simplex.objective() == 0) {
        out.is_member = true;
        out.weights = simplex.primal();
        return out;
    }

    const std::vector<Rational> pi = simplex.duals(b);
    out.separator.assign(pi.begin(), pi.begin() + static_cast<long>(d));
    const Rational pi0 = pi[d];
    bool first = true;
    for (const auto& v : vertices) {
        Rational dot(0);
        for (size_t r = 0; r < d; ++r) dot += out.separator[r] * v[r];
        if (first || dot > out.separator_bound) out.separator_bound = dot;
        first = false;
    }
    Rational tdot(0);
    for (size_t r = 0; r < d; ++r) tdot += out.separator[r] * target[r];
    out.target_value = tdot;
    if (!(out.target_value > out.separator_bound) || -pi0 < out.separator_bound)
        throw Error("hull oracle: separation certificate failed verification (internal)");
    return out;
}

}  // namespace qcorr::lp
