#pragma once

#include <stdexcept>

namespace varifolds {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Caller broke an API contract (mismatched base point, degenerate frame, ...).
struct ContractError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Genuine geometric singularity (cut locus, coincident points).
struct SingularityError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Sample data too coarse to resolve the requested quantity.
struct ResolutionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input (NaN samples, empty lists, unknown names).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Immersion lost rank at a sample node.
struct DegenerateImmersionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace varifolds
