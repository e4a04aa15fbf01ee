// lp.hpp — self-contained linear-programming feasibility kernel: banded
// equality constraints over nonnegative variables, decided by a two-phase
// primal simplex with Bland's anti-cycling rule on a dense tableau.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "qcorr/errors.hpp"

namespace qcorr::lp {

struct LpConstraint {
    std::vector<double> coeffs;
    double rhs = 0.0;
    double band = 0.0;  // |coeffs . x - rhs| <= band
};

struct LpProblem {
    int num_vars = 0;
    std::vector<LpConstraint> rows;

    void validate() const {
        if (num_vars < 1) throw OutOfRangeError("lp: need at least one variable");
        for (const LpConstraint& r : rows) {
            if (static_cast<int>(r.coeffs.size()) != num_vars)
                throw DimensionMismatchError("lp: constraint width mismatch");
            if (!(r.band >= 0.0)) throw OutOfRangeError("lp: band must be nonnegative");
            if (!std::isfinite(r.rhs)) throw OutOfRangeError("lp: rhs must be finite");
            for (double c : r.coeffs)
                if (!std::isfinite(c)) throw OutOfRangeError("lp: coefficient must be finite");
        }
    }
};

enum class LpStatus { feasible, infeasible, ambiguous };

// The Farkas certificate is expressed over the expanded inequality system
// M x <= h (two rows per constraint: +coeffs <= rhs+band, then
// -coeffs <= -rhs+band): y >= 0 with M^T y >= 0 and y.h < 0.
struct LpOutcome {
    LpStatus status = LpStatus::ambiguous;
    std::vector<double> point;          // feasible: x >= 0 meeting every band
    std::vector<double> farkas;         // infeasible: y over the 2r expanded rows
    std::vector<double> dual_weights;   // infeasible: y_upper - y_lower per row
    double phase1_objective = 0.0;
    double certificate_margin = 0.0;    // -y.h with ||y||_inf = 1
    double max_residual = 0.0;          // feasible: max |coeffs.x - rhs| - band over rows
};

namespace detail {

inline constexpr double feasibility_threshold = 1e-7;
inline constexpr double ambiguity_halfwidth = 1e-9;
inline constexpr double pivot_eps = 1e-11;

struct Tableau {
    int rows = 0, cols = 0;  // cols excludes the rhs column
    std::vector<double> a;   // (rows+1) x (cols+1); last row = cost, last col = rhs
    std::vector<int> basis;

    double& at(int r, int c) { return a[static_cast<size_t>(r) * (cols + 1) + c]; }
    double at(int r, int c) const { return a[static_cast<size_t>(r) * (cols + 1) + c]; }

    void pivot(int pr, int pc) {
        const double pivot_value = at(pr, pc);
        for (int c = 0; c <= cols; ++c) at(pr, c) /= pivot_value;
        for (int r = 0; r <= rows; ++r) {
            if (r == pr) continue;
            const double factor = at(r, pc);
            if (factor == 0.0) continue;
            for (int c = 0; c <= cols; ++c) at(r, c) -= factor * at(pr, c);
        }
        basis[static_cast<size_t>(pr)] = pc;
    }

    // Bland's rule: entering = lowest-index improving column; leaving = the
    // minimum-ratio row, ties broken by lowest basic variable index.
    bool bland_step() {
        int enter = -1;
        for (int c = 0; c < cols; ++c)
            if (at(rows, c) < -pivot_eps) {
                enter = c;
                break;
            }
        if (enter < 0) return false;
        int leave = -1;
        double best_ratio = 0.0;
        for (int r = 0; r < rows; ++r) {
            const double coef = at(r, enter);
            if (coef <= pivot_eps) continue;
            const double ratio = at(r, cols) / coef;
            if (leave < 0 || ratio < best_ratio - 1e-15 ||
                (std::abs(ratio - best_ratio) <= 1e-15 &&
                 basis[static_cast<size_t>(r)] < basis[static_cast<size_t>(leave)]))
            {
                leave = r;
                best_ratio = ratio;
            }
        }
        if (leave < 0) throw Error("lp: phase-1 objective unbounded (internal)");
        pivot(leave, enter);
        return true;
    }
};

}  // namespace detail

// Checks a Farkas certificate against the problem: y >= 0, M^T y >= -eps
// componentwise, and margin = -y.h. Returns the margin (negative or zero if
// the certificate is invalid).
inline double farkas_margin(const LpProblem& p, const std::vector<double>& y) {
    const size_t r = p.rows.size();
    if (y.size() != 2 * r) return -1.0;
    double norm = 0.0;
    for (double v : y) {
        if (v < -1e-12) return -1.0;
        norm = std::max(norm, std::abs(v));
    }
    if (norm <= 0.0) return -1.0;
    for (int k = 0; k < p.num_vars; ++k) {
        double combo = 0.0;
        for (size_t i = 0; i < r; ++i)
            combo += (y[2 * i] - y[2 * i + 1]) * p.rows[i].coeffs[static_cast<size_t>(k)];
        if (combo < -1e-9) return -1.0;
    }
    double yh = 0.0;
    for (size_t i = 0; i < r; ++i) {
        yh += y[2 * i] * (p.rows[i].rhs + p.rows[i].band);
        yh += y[2 * i + 1] * (-p.rows[i].rhs + p.rows[i].band);
    }
    return -yh / norm;
}

inline LpOutcome solve_feasibility(const LpProblem& p) {
    p.validate();
    const int n = p.num_vars;
    const size_t r = p.rows.size();

    // Degenerate rows decide immediately: 0 . x never leaves the band.
    for (size_t i = 0; i < r; ++i) {
        bool all_zero = true;
        for (double c : p.rows[i].coeffs)
            if (c != 0.0) all_zero = false;
        if (all_zero && std::abs(p.rows[i].rhs) > p.rows[i].band + detail::feasibility_threshold) {
            LpOutcome out;
            out.status = LpStatus::infeasible;
            out.farkas.assign(2 * r, 0.0);
            out.farkas[2 * i + (p.rows[i].rhs > 0.0 ? 1 : 0)] = 1.0;
            out.dual_weights.assign(r, 0.0);
            out.dual_weights[i] = p.rows[i].rhs > 0.0 ? -1.0 : 1.0;
            out.phase1_objective = std::abs(p.rows[i].rhs) - p.rows[i].band;
            out.certificate_margin = farkas_margin(p, out.farkas);
            return out;
        }
    }

    // Expanded system M x <= h, then standard form with slacks; rows whose h
    // is negative are negated and get an artificial variable.
    const int erows = static_cast<int>(2 * r);
    std::vector<std::vector<double>> m(static_cast<size_t>(erows));
    std::vector<double> h(static_cast<size_t>(erows));
    for (size_t i = 0; i < r; ++i) {
        m[2 * i] = p.rows[i].coeffs;
        h[2 * i] = p.rows[i].rhs + p.rows[i].band;
        m[2 * i + 1].resize(static_cast<size_t>(n));
        for (int k = 0; k < n; ++k) m[2 * i + 1][static_cast<size_t>(k)] = -p.rows[i].coeffs[static_cast<size_t>(k)];
        h[2 * i + 1] = -p.rows[i].rhs + p.rows[i].band;
    }

    std::vector<int> sign(static_cast<size_t>(erows), 1);
    std::vector<int> artificial_col(static_cast<size_t>(erows), -1);
    int num_artificials = 0;
    for (int e = 0; e < erows; ++e)
        if (h[static_cast<size_t>(e)] < 0.0) {
            sign[static_cast<size_t>(e)] = -1;
            artificial_col[static_cast<size_t>(e)] = num_artificials++;
        }

    detail::Tableau t;
    t.rows = erows;
    t.cols = n + erows + num_artificials;
    t.a.assign(static_cast<size_t>(t.rows + 1) * (t.cols + 1), 0.0);
    t.basis.resize(static_cast<size_t>(erows));

    for (int e = 0; e < erows; ++e) {
        const double s = static_cast<double>(sign[static_cast<size_t>(e)]);
        for (int k = 0; k < n; ++k) t.at(e, k) = s * m[static_cast<size_t>(e)][static_cast<size_t>(k)];
        t.at(e, n + e) = s;  // slack
        t.at(e, t.cols) = s * h[static_cast<size_t>(e)];
        if (artificial_col[static_cast<size_t>(e)] >= 0) {
            const int c = n + erows + artificial_col[static_cast<size_t>(e)];
            t.at(e, c) = 1.0;
            t.basis[static_cast<size_t>(e)] = c;
        } else {
            t.basis[static_cast<size_t>(e)] = n + e;
        }
    }

    // Phase-1 cost row: minimize the artificial sum, expressed over the
    // nonbasic columns by subtracting every artificial-basis row.
    for (int e = 0; e < erows; ++e) {
        if (artificial_col[static_cast<size_t>(e)] < 0) continue;
        for (int c = 0; c <= t.cols; ++c) t.at(t.rows, c) -= t.at(e, c);
    }
    for (int e = 0; e < erows; ++e)
        if (artificial_col[static_cast<size_t>(e)] >= 0)
            t.at(t.rows, n + erows + artificial_col[static_cast<size_t>(e)]) = 0.0;

    long long guard = 0;
    const long long guard_limit =
        4LL * (t.cols + 1) * (t.rows + 1) * (t.cols + 1);
    while (t.bland_step())
        if (++guard > guard_limit) throw Error("lp: pivot limit exceeded (internal)");

    double phase1 = 0.0;
    for (int e = 0; e < erows; ++e)
        if (t.basis[static_cast<size_t>(e)] >= n + erows) phase1 += t.at(e, t.cols);

    LpOutcome out;
    out.phase1_objective = phase1;

    if (phase1 < detail::feasibility_threshold - detail::ambiguity_halfwidth) {
        out.status = LpStatus::feasible;
        out.point.assign(static_cast<size_t>(n), 0.0);
        for (int e = 0; e < erows; ++e)
            if (t.basis[static_cast<size_t>(e)] < n)
                out.point[static_cast<size_t>(t.basis[static_cast<size_t>(e)])] =
                    std::max(0.0, t.at(e, t.cols));
        double worst = -1e300;
        for (size_t i = 0; i < r; ++i) {
            double dot = 0.0;
            for (int k = 0; k < n; ++k)
                dot += p.rows[i].coeffs[static_cast<size_t>(k)] * out.point[static_cast<size_t>(k)];
            worst = std::max(worst, std::abs(dot - p.rows[i].rhs) - p.rows[i].band);
        }
        out.max_residual = worst;
        if (worst > 1e-9) {
            // The basic point does not actually meet the bands: report the
            // doubt instead of converting it into an answer.
            out.status = LpStatus::ambiguous;
        }
        return out;
    }

    if (phase1 > detail::feasibility_threshold + detail::ambiguity_halfwidth) {
        // Dual values from the final reduced-cost row, read off the initial
        // identity columns (artificial where present, slack otherwise).
        std::vector<double> pi(static_cast<size_t>(erows));
        for (int e = 0; e < erows; ++e) {
            if (artificial_col[static_cast<size_t>(e)] >= 0)
                pi[static_cast<size_t>(e)] =
                    1.0 - t.at(t.rows, n + erows + artificial_col[static_cast<size_t>(e)]);
            else
                pi[static_cast<size_t>(e)] =
                    -t.at(t.rows, n + e) * static_cast<double>(sign[static_cast<size_t>(e)]);
        }
        // For negated rows the dual of the original row is -pi.
        out.farkas.assign(static_cast<size_t>(erows), 0.0);
        for (int e = 0; e < erows; ++e) {
            double y = -pi[static_cast<size_t>(e)] * static_cast<double>(sign[static_cast<size_t>(e)]);
            out.farkas[static_cast<size_t>(e)] = std::max(0.0, y);
        }
        const double margin = farkas_margin(p, out.farkas);
        if (margin > detail::feasibility_threshold) {
            out.status = LpStatus::infeasible;
            out.certificate_margin = margin;
            out.dual_weights.assign(r, 0.0);
            double norm = 0.0;
            for (double v : out.farkas) norm = std::max(norm, v);
            for (size_t i = 0; i < r; ++i)
                out.dual_weights[i] = (out.farkas[2 * i] - out.farkas[2 * i + 1]) / norm;
            return out;
        }
        out.status = LpStatus::ambiguous;
        return out;
    }

    out.status = LpStatus::ambiguous;
    return out;
}

}  // namespace qcorr::lp
