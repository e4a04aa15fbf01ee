// errors.hpp — exception types shared by all qcorr modules

#pragma once

#include <stdexcept>
#include <string>

namespace qcorr {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatchError : Error {
    using Error::Error;
};

struct BadIndexError : Error {
    using Error::Error;
};

// Validation failures carry the offending residual so callers can report it.
struct NotHermitianError : Error {
    double residual;
    explicit NotHermitianError(double r)
        : Error("operator is not Hermitian (max residual " + std::to_string(r) + ")"),
          residual(r) {}
};

struct NotIdempotentError : Error {
    double residual;
    explicit NotIdempotentError(double r)
        : Error("operator is not idempotent (max residual " + std::to_string(r) + ")"),
          residual(r) {}
};

struct NotDensityError : Error {
    double residual;
    NotDensityError(const std::string& what, double r)
        : Error(what + " (residual " + std::to_string(r) + ")"), residual(r) {}
};

struct NonRealResultError : Error {
    double imaginary;
    explicit NonRealResultError(double im)
        : Error("trace product has non-real value (imaginary part " + std::to_string(im) + ")"),
          imaginary(im) {}
};

struct NotCommutingError : Error {
    int first, second;
    NotCommutingError(int a, int b)
        : Error("operators " + std::to_string(a) + " and " + std::to_string(b) +
                " do not commute"),
          first(a), second(b) {}
};

struct OutOfRangeError : Error {
    using Error::Error;
};

struct ZeroVarianceError : Error {
    ZeroVarianceError() : Error("deterministic variable has no defined correlation") {}
};

struct UndeclaredPairError : Error {
    int first, second;
    UndeclaredPairError(int j, int k)
        : Error("pair (" + std::to_string(j) + ", " + std::to_string(k) +
                ") has no declared joint probability"),
          first(j), second(k) {}
};

struct UnknownLabelError : Error {
    explicit UnknownLabelError(const std::string& label)
        : Error("unknown observable label '" + label + "'") {}
};

struct TooManyVariablesError : Error {
    using Error::Error;
};

// Raised when a feasibility decision falls inside the numerical dead band:
// the result is reported as undecidable, never guessed.
struct NumericallyAmbiguousError : Error {
    using Error::Error;
};

struct UnknownBuiltinError : Error {
    explicit UnknownBuiltinError(const std::string& name)
        : Error("unknown builtin '" + name + "'") {}
};

struct ScenarioSyntaxError : Error {
    using Error::Error;
};

struct ScenarioValidationError : Error {
    using Error::Error;
};

}  // namespace qcorr
