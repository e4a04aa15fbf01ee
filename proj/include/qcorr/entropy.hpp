// entropy.hpp — von Neumann entropy, reduced states, and the information
// inequality S_j <= S whose violation has no classical counterpart.

#pragma once

#include <cmath>
#include <vector>

#include "qcorr/operators.hpp"

namespace qcorr::entropy {

using hilbert::Complex;
using hilbert::DensityOperator;
using hilbert::Operator;

// -sum lambda ln(lambda) in nats; eigenvalues below 1e-12 count as zero.
inline double von_neumann_entropy(const DensityOperator& rho) {
    const hilbert::EigenSystem es = hilbert::hermitian_eigensystem(rho.op());
    double s = 0.0;
    for (double lambda : es.eigenvalues)
        if (lambda > 1e-12) s -= lambda * std::log(lambda);
    return std::max(0.0, s);
}

// (|01> - |10>) / sqrt(2) as a density operator.
inline DensityOperator make_singlet() {
    const double s = 1.0 / std::sqrt(2.0);
    return DensityOperator::validate(
        hilbert::pure_density({Complex{0.0}, Complex{s}, Complex{-s}, Complex{0.0}}));
}

// cos(eta)|01> - sin(eta)|10>: interpolates product (eta = 0) to singlet
// (eta = 45 degrees).
inline DensityOperator make_partially_entangled(double eta_rad) {
    return DensityOperator::validate(hilbert::pure_density(
        {Complex{0.0}, Complex{std::cos(eta_rad)}, Complex{-std::sin(eta_rad)}, Complex{0.0}}));
}

// Reduced state on one factor: trace out everything else, highest index first
// so positions stay valid.
inline DensityOperator reduce_to_factor(const DensityOperator& rho,
                                        const std::vector<int>& subsystem_dims, int factor) {
    if (factor < 0 || factor >= static_cast<int>(subsystem_dims.size()))
        throw BadIndexError("reduce_to_factor: factor out of range");
    DensityOperator out = rho;
    std::vector<int> dims = subsystem_dims;
    for (int s = static_cast<int>(dims.size()) - 1; s >= 0; --s) {
        if (s == factor) continue;
        out = hilbert::partial_trace(out, dims, s);
        dims.erase(dims.begin() + s);
    }
    return out;
}

struct EntropyReport {
    double total = 0.0;                  // S, nats
    std::vector<double> parts;           // S_j per subsystem
    double lower_bound_slack = 0.0;      // min_j (S - S_j); negative flags violation
    double subadditivity_slack = 0.0;    // sum_j S_j - S
    bool violation = false;              // some S_j > S + 1e-9
    int violating_subsystem = -1;
};

// S and every S_j, with the quantum-only violation S_j > S flagged. The
// subadditivity side holds for von Neumann entropy too and is reported as a
// slack.
inline EntropyReport information_inequality_report(const DensityOperator& rho,
                                                   const std::vector<int>& subsystem_dims) {
    long long prod = 1;
    for (int d : subsystem_dims) prod *= d;
    if (prod != rho.dim())
        throw DimensionMismatchError("information inequality: dims do not multiply to dim");

    EntropyReport report;
    report.total = von_neumann_entropy(rho);
    double sum_parts = 0.0;
    double min_slack = 1e300;
    for (int j = 0; j < static_cast<int>(subsystem_dims.size()); ++j) {
        const double sj = von_neumann_entropy(reduce_to_factor(rho, subsystem_dims, j));
        report.parts.push_back(sj);
        sum_parts += sj;
        const double slack = report.total - sj;
        if (slack < min_slack) min_slack = slack;
        if (sj > report.total + 1e-9 && report.violating_subsystem < 0) {
            report.violation = true;
            report.violating_subsystem = j;
        }
    }
    report.lower_bound_slack = min_slack;
    report.subadditivity_slack = sum_parts - report.total;
    return report;
}

// Product-form probe: rebuilds tensor(reduced states) and compares. A state
// that passes is exactly uncorrelated; entangled states always fail, which is
// the direction the information-inequality invariant needs.
inline bool is_product_state(const DensityOperator& rho, const std::vector<int>& subsystem_dims,
                             double tolerance = 1e-6) {
    long long prod = 1;
    for (int d : subsystem_dims) prod *= d;
    if (prod != rho.dim())
        throw DimensionMismatchError("product probe: dims do not multiply to dim");
    Operator rebuilt = hilbert::identity(1);
    for (int j = 0; j < static_cast<int>(subsystem_dims.size()); ++j)
        rebuilt = hilbert::tensor_product(rebuilt,
                                          reduce_to_factor(rho, subsystem_dims, j).op());
    return hilbert::max_norm(hilbert::sub(rebuilt, rho.op())) <= tolerance;
}

}  // namespace qcorr::entropy
