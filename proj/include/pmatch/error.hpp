#ifndef PMATCH_ERROR_HPP
#define PMATCH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pmatch {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or argument (out-of-range n, d, delta, probabilities...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Division by zero in a quantity that is otherwise well-defined, e.g. the
// p_G / p_B^streak bound with p_B = 0.
class DivisionError : public ParameterError {
public:
    using ParameterError::ParameterError;
};

// An adversary policy emitted a probability outside its allowed range.
class ContractViolation : public ParameterError {
public:
    using ParameterError::ParameterError;
};

// Inputs that disagree with each other: mismatched agent counts, matchings
// referencing non-edges, malformed proposal logs.
class StructuralError : public Error {
public:
    using Error::Error;
};

// Brute-force routines refuse instances above their size guard.
class ScaleError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// A broken internal invariant. Seeing one of these means a bug.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

}  // namespace pmatch

#endif  // PMATCH_ERROR_HPP
