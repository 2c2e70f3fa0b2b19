#pragma once

#include <stdexcept>
#include <string>

namespace walshkit {

// Raised when an operation would need a finer a-adic grid than the
// configured maximum level (or would overflow 64-bit cell/index math).
class ResolutionError : public std::runtime_error {
public:
    explicit ResolutionError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a point cannot be represented exactly on any finite a-adic grid
// within 64-bit rational arithmetic.
class PrecisionError : public std::runtime_error {
public:
    explicit PrecisionError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a construction cannot meet its contract at the configured
// resolution; carries the residual that was achievable.
class FeasibilityError : public std::runtime_error {
public:
    FeasibilityError(const std::string& what, double achieved_residual)
        : std::runtime_error(what), achieved_residual(achieved_residual) {}
    double achieved_residual;
};

} // namespace walshkit
