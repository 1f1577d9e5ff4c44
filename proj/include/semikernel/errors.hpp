#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace semikernel {

// Usage / input errors (bad arguments, malformed files). CLI maps these to exit 2.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Mathematical property failures (non-semielliptic symbol, divergent integral,
// quadrature that refuses to converge). CLI maps these to exit 1.
class MathError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SemiellipticityError : public MathError {
public:
    SemiellipticityError(const std::string& msg, std::vector<double> point)
        : MathError(msg), offendingPoint(std::move(point)) {}
    std::vector<double> offendingPoint;
};

class DivergenceError : public MathError {
public:
    using MathError::MathError;
};

class AccuracyError : public MathError {
public:
    using MathError::MathError;
};

class UnsupportedOperatorError : public MathError {
public:
    using MathError::MathError;
};

class DegenerateInputError : public MathError {
public:
    using MathError::MathError;
};

} // namespace semikernel
