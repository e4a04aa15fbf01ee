// operators.hpp — finite-dimensional complex operator algebra: construction,
// validation, composition and spectral analysis of the operators the rest of
// the library consumes.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include "qcorr/errors.hpp"

namespace qcorr::hilbert {

using Complex = std::complex<double>;

namespace tol {
inline constexpr double validation = 1e-9;       // all max-norm invariant checks
inline constexpr double degeneracy_gap = 1e-8;   // eigenvalue merge threshold
inline constexpr double jacobi_off = 1e-12;      // off-diagonal Frobenius target
inline constexpr double reconstruction = 1e-8;   // sum(lambda_j P_j) residual
}  // namespace tol

// Dense square complex matrix, row-major. Immutable by convention once built:
// every operation below returns a fresh value.
class Operator {
public:
    Operator() : dim_(1), a_(1, Complex{0.0, 0.0}) {}

    explicit Operator(int dim) : dim_(dim), a_(static_cast<size_t>(dim) * dim) {
        if (dim < 1) throw DimensionMismatchError("operator dimension must be >= 1");
    }

    Operator(int dim, std::vector<Complex> entries) : dim_(dim), a_(std::move(entries)) {
        if (dim < 1) throw DimensionMismatchError("operator dimension must be >= 1");
        if (a_.size() != static_cast<size_t>(dim) * dim)
            throw DimensionMismatchError("entry count does not match dimension");
        for (const Complex& z : a_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
                throw OutOfRangeError("operator entries must be finite");
    }

    int dim() const { return dim_; }

    Complex& operator()(int i, int j) { return a_[static_cast<size_t>(i) * dim_ + j]; }
    const Complex& operator()(int i, int j) const {
        return a_[static_cast<size_t>(i) * dim_ + j];
    }

    const std::vector<Complex>& entries() const { return a_; }

private:
    int dim_;
    std::vector<Complex> a_;
};

// ------------------------------- constructors -------------------------------

inline Operator identity(int dim) {
    Operator m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

inline Operator zero(int dim) { return Operator(dim); }

inline Operator diagonal(const std::vector<double>& d) {
    Operator m(static_cast<int>(d.size()));
    for (int i = 0; i < m.dim(); ++i) m(i, i) = d[static_cast<size_t>(i)];
    return m;
}

inline Operator pauli_x() {
    Operator m(2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    return m;
}

inline Operator pauli_y() {
    Operator m(2);
    m(0, 1) = Complex{0.0, -1.0};
    m(1, 0) = Complex{0.0, 1.0};
    return m;
}

inline Operator pauli_z() { return diagonal({1.0, -1.0}); }

// |k><k| in the computational basis.
inline Operator basis_projector(int dim, int k) {
    if (k < 0 || k >= dim) throw BadIndexError("basis index out of range");
    Operator m(dim);
    m(k, k) = 1.0;
    return m;
}

// |psi><psi| for a (not necessarily normalized) state vector.
inline Operator pure_density(const std::vector<Complex>& psi) {
    const int d = static_cast<int>(psi.size());
    double n2 = 0.0;
    for (const Complex& z : psi) n2 += std::norm(z);
    if (n2 <= 0.0) throw OutOfRangeError("state vector must be nonzero");
    Operator m(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            m(i, j) = psi[static_cast<size_t>(i)] * std::conj(psi[static_cast<size_t>(j)]) / n2;
    return m;
}

// --------------------------------- algebra ----------------------------------

inline Operator add(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("add: dimension mismatch");
    Operator r(a.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) r(i, j) = a(i, j) + b(i, j);
    return r;
}

inline Operator sub(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("sub: dimension mismatch");
    Operator r(a.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) r(i, j) = a(i, j) - b(i, j);
    return r;
}

inline Operator scale(const Operator& a, Complex s) {
    Operator r(a.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) r(i, j) = s * a(i, j);
    return r;
}

inline Operator matmul(const Operator& a, const Operator& b) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("matmul: dimension mismatch");
    const int n = a.dim();
    Operator r(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) continue;
            for (int j = 0; j < n; ++j) r(i, j) += aik * b(k, j);
        }
    return r;
}

inline Operator adjoint(const Operator& a) {
    Operator r(a.dim());
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j) r(i, j) = std::conj(a(j, i));
    return r;
}

inline Complex trace(const Operator& a) {
    Complex t{};
    for (int i = 0; i < a.dim(); ++i) t += a(i, i);
    return t;
}

// max |entry|; all validation tolerances are stated in this norm.
inline double max_norm(const Operator& a) {
    double m = 0.0;
    for (const Complex& z : a.entries()) m = std::max(m, std::abs(z));
    return m;
}

inline double frobenius_norm(const Operator& a) {
    double s = 0.0;
    for (const Complex& z : a.entries()) s += std::norm(z);
    return std::sqrt(s);
}

inline double hermiticity_residual(const Operator& a) {
    double m = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j)
            m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
    return m;
}

inline bool is_hermitian(const Operator& a, double eps = tol::validation) {
    return hermiticity_residual(a) <= eps;
}

inline bool approx_equal(const Operator& a, const Operator& b, double eps = tol::validation) {
    return a.dim() == b.dim() && max_norm(sub(a, b)) <= eps;
}

// ------------------------------ validated types ------------------------------

class Projector {
public:
    const Operator& op() const { return op_; }
    int dim() const { return op_.dim(); }

    // Checks the two projector invariants at the validation tolerance.
    static Projector validate(const Operator& op) {
        const double h = hermiticity_residual(op);
        if (h > tol::validation) throw NotHermitianError(h);
        const double idem = max_norm(sub(matmul(op, op), op));
        if (idem > tol::validation) throw NotIdempotentError(idem);
        return Projector(op);
    }

    Projector complement() const {
        return Projector(sub(identity(op_.dim()), op_));
    }

private:
    explicit Projector(Operator op) : op_(std::move(op)) {}
    Operator op_;
    friend class DensityOperator;
    friend Projector unchecked_projector(Operator);
};

// For internal use only: skips re-validation when idempotence is structural
// (e.g. a complement of a validated projector).
inline Projector unchecked_projector(Operator op) { return Projector(std::move(op)); }

struct EigenSystem;
EigenSystem hermitian_eigensystem(const Operator& a);

class DensityOperator {
public:
    const Operator& op() const { return op_; }
    int dim() const { return op_.dim(); }

    static DensityOperator validate(const Operator& op);

private:
    explicit DensityOperator(Operator op) : op_(std::move(op)) {}
    Operator op_;
};

// ------------------------------- composition --------------------------------

inline Operator tensor_product(const Operator& a, const Operator& b) {
    const int da = a.dim(), db = b.dim();
    Operator r(da * db);
    for (int i = 0; i < da; ++i)
        for (int j = 0; j < da; ++j) {
            const Complex aij = a(i, j);
            if (aij == Complex{}) continue;
            for (int k = 0; k < db; ++k)
                for (int l = 0; l < db; ++l) r(i * db + k, j * db + l) = aij * b(k, l);
        }
    return r;
}

// op acting on one tensor slot, identity elsewhere.
inline Operator embed(const Operator& op, const std::vector<int>& subsystem_dims, int slot) {
    if (slot < 0 || slot >= static_cast<int>(subsystem_dims.size()))
        throw BadIndexError("embed: slot out of range");
    if (subsystem_dims[static_cast<size_t>(slot)] != op.dim())
        throw DimensionMismatchError("embed: operator does not fit the slot");
    Operator r = identity(1);
    for (int s = 0; s < static_cast<int>(subsystem_dims.size()); ++s)
        r = tensor_product(r, s == slot ? op : identity(subsystem_dims[static_cast<size_t>(s)]));
    return r;
}

inline bool commutes(const Operator& a, const Operator& b, double eps = tol::validation) {
    if (a.dim() != b.dim()) throw DimensionMismatchError("commutes: dimension mismatch");
    return max_norm(sub(matmul(a, b), matmul(b, a))) <= eps;
}

inline Operator partial_trace_op(const Operator& m, const std::vector<int>& subsystem_dims,
                                 int traced_index) {
    long long prod = 1;
    for (int d : subsystem_dims) {
        if (d < 1) throw DimensionMismatchError("partial_trace: subsystem dims must be >= 1");
        prod *= d;
    }
    if (prod != m.dim())
        throw DimensionMismatchError("partial_trace: subsystem dims do not multiply to dim");
    const int nsub = static_cast<int>(subsystem_dims.size());
    if (traced_index < 0 || traced_index >= nsub)
        throw BadIndexError("partial_trace: traced index out of range");

    std::vector<int> keep_dims;
    for (int s = 0; s < nsub; ++s)
        if (s != traced_index) keep_dims.push_back(subsystem_dims[static_cast<size_t>(s)]);
    int out_dim = 1;
    for (int d : keep_dims) out_dim *= d;
    const int td = subsystem_dims[static_cast<size_t>(traced_index)];

    // Strides of each factor inside the full row-major index.
    std::vector<long long> stride(static_cast<size_t>(nsub), 1);
    for (int s = nsub - 2; s >= 0; --s)
        stride[static_cast<size_t>(s)] =
            stride[static_cast<size_t>(s + 1)] * subsystem_dims[static_cast<size_t>(s + 1)];

    auto full_index = [&](int kept_flat, int t) {
        long long idx = 0;
        int rem = kept_flat;
        for (int s = nsub - 1, k = static_cast<int>(keep_dims.size()) - 1; s >= 0; --s) {
            if (s == traced_index) {
                idx += t * stride[static_cast<size_t>(s)];
            } else {
                const int d = keep_dims[static_cast<size_t>(k)];
                idx += (rem % d) * stride[static_cast<size_t>(s)];
                rem /= d;
                --k;
            }
        }
        return static_cast<int>(idx);
    };

    Operator r(out_dim);
    for (int i = 0; i < out_dim; ++i)
        for (int j = 0; j < out_dim; ++j) {
            Complex s{};
            for (int t = 0; t < td; ++t) s += m(full_index(i, t), full_index(j, t));
            r(i, j) = s;
        }
    return r;
}

inline DensityOperator partial_trace(const DensityOperator& rho,
                                     const std::vector<int>& subsystem_dims, int traced_index) {
    return DensityOperator::validate(partial_trace_op(rho.op(), subsystem_dims, traced_index));
}

// ----------------------------- spectral analysis ----------------------------

// Raw eigensystem: ascending eigenvalues and the matching orthonormal
// eigenvector columns, before any degeneracy merging.
struct EigenSystem {
    std::vector<double> eigenvalues;
    Operator vectors;  // column j is the eigenvector of eigenvalues[j]

    EigenSystem() : vectors(1) {}
};

namespace detail {

// One cyclic complex-Jacobi pass; returns the rotation count.
inline int jacobi_sweep(Operator& a, Operator& v) {
    const int n = a.dim();
    int rotations = 0;
    for (int p = 0; p < n - 1; ++p)
        for (int q = p + 1; q < n; ++q) {
            const Complex apq = a(p, q);
            const double r = std::abs(apq);
            if (r == 0.0) continue;
            ++rotations;
            const double app = a(p, p).real();
            const double aqq = a(q, q).real();
            const Complex u = std::conj(apq) / r;  // phase that makes the pivot real
            const double theta = (aqq - app) / (2.0 * r);
            const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                             (std::abs(theta) + std::sqrt(theta * theta + 1.0));
            const double c = 1.0 / std::sqrt(t * t + 1.0);
            const double s = t * c;

            // A <- G' A G and V <- V G with G = [[c, s], [-u s, u c]] on (p, q).
            for (int i = 0; i < n; ++i) {
                const Complex aip = a(i, p), aiq = a(i, q);
                a(i, p) = c * aip - u * s * aiq;
                a(i, q) = s * aip + u * c * aiq;
            }
            for (int j = 0; j < n; ++j) {
                const Complex apj = a(p, j), aqj = a(q, j);
                a(p, j) = c * apj - std::conj(u) * s * aqj;
                a(q, j) = s * apj + std::conj(u) * c * aqj;
            }
            for (int i = 0; i < n; ++i) {
                const Complex vip = v(i, p), viq = v(i, q);
                v(i, p) = c * vip - u * s * viq;
                v(i, q) = s * vip + u * c * viq;
            }
            a(p, q) = Complex{};
            a(q, p) = Complex{};
            a(p, p) = Complex{a(p, p).real(), 0.0};
            a(q, q) = Complex{a(q, q).real(), 0.0};
        }
    return rotations;
}

inline double off_diagonal_frobenius(const Operator& a) {
    double s = 0.0;
    for (int i = 0; i < a.dim(); ++i)
        for (int j = 0; j < a.dim(); ++j)
            if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
}

}  // namespace detail

// Cyclic Jacobi diagonalization of a Hermitian matrix. Deterministic sweep
// order; converges when the off-diagonal Frobenius norm of the max-abs-scaled
// matrix drops below 1e-12.
inline EigenSystem hermitian_eigensystem(const Operator& input) {
    const double h = hermiticity_residual(input);
    if (h > tol::validation) throw NotHermitianError(h);
    const int n = input.dim();

    // Work on the symmetrized, scale-normalized copy.
    Operator work(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) work(i, j) = 0.5 * (input(i, j) + std::conj(input(j, i)));
    const double mag = std::max(max_norm(work), 1e-300);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) work(i, j) /= mag;

    Operator v = identity(n);
    constexpr int max_sweeps = 100;
    int sweep = 0;
    while (detail::off_diagonal_frobenius(work) > tol::jacobi_off) {
        if (++sweep > max_sweeps) throw Error("jacobi eigensolver failed to converge");
        detail::jacobi_sweep(work, v);
    }

    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return work(x, x).real() < work(y, y).real();
    });

    EigenSystem es;
    es.eigenvalues.resize(static_cast<size_t>(n));
    es.vectors = Operator(n);
    for (int j = 0; j < n; ++j) {
        es.eigenvalues[static_cast<size_t>(j)] =
            work(order[static_cast<size_t>(j)], order[static_cast<size_t>(j)]).real() * mag;
        for (int i = 0; i < n; ++i) es.vectors(i, j) = v(i, order[static_cast<size_t>(j)]);
    }
    return es;
}

// Eigenvalues plus rank-grouped eigenprojectors; eigenvalues closer than the
// degeneracy gap are merged into a single projector.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;       // ascending, one per merged group
    std::vector<Projector> eigenprojectors;
};

inline SpectralDecomposition spectral_decompose(const Operator& a) {
    const EigenSystem es = hermitian_eigensystem(a);
    const int n = a.dim();

    SpectralDecomposition sd;
    int start = 0;
    while (start < n) {
        int end = start + 1;
        while (end < n && es.eigenvalues[static_cast<size_t>(end)] -
                                  es.eigenvalues[static_cast<size_t>(end - 1)] <
                              tol::degeneracy_gap)
            ++end;
        Operator p(n);
        for (int g = start; g < end; ++g)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    p(i, j) += es.vectors(i, g) * std::conj(es.vectors(j, g));
        // Symmetrize away rounding before validation.
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const Complex m = 0.5 * (p(i, j) + std::conj(p(j, i)));
                p(i, j) = m;
                p(j, i) = std::conj(m);
            }
        double lambda = 0.0;
        for (int g = start; g < end; ++g) lambda += es.eigenvalues[static_cast<size_t>(g)];
        lambda /= (end - start);
        sd.eigenvalues.push_back(lambda);
        sd.eigenprojectors.push_back(Projector::validate(p));
        start = end;
    }
    return sd;
}

inline DensityOperator DensityOperator::validate(const Operator& op) {
    const double h = hermiticity_residual(op);
    if (h > tol::validation) throw NotHermitianError(h);
    const double tr = std::abs(trace(op) - Complex{1.0, 0.0});
    if (tr > tol::validation) throw NotDensityError("density operator trace is not 1", tr);
    const EigenSystem es = hermitian_eigensystem(op);
    const double lo = es.eigenvalues.empty() ? 0.0 : es.eigenvalues.front();
    if (lo < -tol::validation)
        throw NotDensityError("density operator has a negative eigenvalue", lo);
    return DensityOperator(op);
}

// --------------------------------- traces -----------------------------------

enum class RealityCheck { none, commuting_projectors };

// Re Tr(rho * f1 * f2 * ... * fk). With the commuting-projector contract
// claimed, an imaginary part above the validation tolerance is an error.
inline double trace_product(const DensityOperator& rho, const std::vector<Operator>& factors,
                            RealityCheck check = RealityCheck::none) {
    Operator m = identity(rho.dim());
    for (const Operator& f : factors) {
        if (f.dim() != rho.dim())
            throw DimensionMismatchError("trace_product: factor dimension mismatch");
        m = matmul(m, f);
    }
    Complex t{};
    for (int i = 0; i < rho.dim(); ++i)
        for (int j = 0; j < rho.dim(); ++j) t += rho.op()(i, j) * m(j, i);
    if (check == RealityCheck::commuting_projectors && std::abs(t.imag()) > tol::validation)
        throw NonRealResultError(t.imag());
    return t.real();
}

inline Projector validate_projector(const Operator& op) { return Projector::validate(op); }

// 1/2 (I + n·sigma) with n = (sin t cos p, sin t sin p, cos t); the default
// azimuth 0 keeps the direction in the x-z plane.
inline Projector spin_projector(double polar_rad, double azimuth_rad = 0.0) {
    const double nx = std::sin(polar_rad) * std::cos(azimuth_rad);
    const double ny = std::sin(polar_rad) * std::sin(azimuth_rad);
    const double nz = std::cos(polar_rad);
    Operator m(2);
    m(0, 0) = 0.5 * (1.0 + nz);
    m(1, 1) = 0.5 * (1.0 - nz);
    m(0, 1) = 0.5 * Complex{nx, -ny};
    m(1, 0) = 0.5 * Complex{nx, ny};
    return Projector::validate(m);
}

}  // namespace qcorr::hilbert
