#pragma once

#include <stdexcept>
#include <string>

namespace tribell {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Iterative procedure failed to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A statistic is undefined for the given counts (e.g. all zero).
class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tomography data does not determine the state.
class IdentifiabilityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LookupError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tribell
