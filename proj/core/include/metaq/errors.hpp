#pragma once

#include <stdexcept>
#include <string>

namespace metaq {

/// Base class for all domain errors raised by this library. CLI maps these
/// to exit code 1; anything else is a bug.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivisionByZeroError : public Error {
public:
    DivisionByZeroError() : Error("rational division by zero") {}
};

/// Raised when adding SqrtDyadic values whose half-exponents differ in parity.
class ParityMismatchError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& message)
        : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

/// A postselected register had zero probability mass on |1>; the whole
/// computation is invalid.
class InvalidPostselection : public Error {
public:
    using Error::Error;
};

/// The valid-output set V of a correlated measurement is empty; the whole
/// computation is invalid.
class InvalidCorrelatedMeasurement : public Error {
public:
    using Error::Error;
};

/// Two partitions forced contradictory bit values in the literal bitwise
/// sampler.
class IntegrityError : public Error {
public:
    using Error::Error;
};

/// An oracle query conditioned on an event of probability zero.
class ZeroProbabilityConditioning : public Error {
public:
    using Error::Error;
};

/// A configurable desk-scale limit (live qubits, branch leaves, solver size)
/// was exceeded.
class LimitExceeded : public Error {
public:
    using Error::Error;
};

/// Precondition violations on otherwise well-formed inputs.
class DomainError : public Error {
public:
    using Error::Error;
};

}  // namespace metaq
