#pragma once

#include <stdexcept>
#include <string>

namespace magtrace {

/// A precondition on an input value was violated (maps to CLI exit code 2).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A request reaches beyond the retained truncation.
class RangeError : public std::range_error {
public:
    using std::range_error::range_error;
};

/// A quadrature or grid budget cannot deliver the requested computation.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed (e.g. a non-diagonalizable block).
class ComputationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace magtrace
