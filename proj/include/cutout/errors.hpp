#pragma once
#include <stdexcept>
#include <string>

namespace cutout {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed space description (ratios/offsets/arcs fail validation).
class InvalidSpaceError : public Error {
public:
    using Error::Error;
};

// Argument outside the operation's domain (x off the hull, bad scale, empty grid).
class DomainError : public Error {
public:
    using Error::Error;
};

// Operation asked of a space kind that cannot support it.
class UnsupportedSpaceError : public Error {
public:
    using Error::Error;
};

// Adaptive refinement exhausted its cell/depth budget before reaching the
// requested tolerance; carries the error bound that was actually achieved.
class ToleranceError : public Error {
public:
    ToleranceError(const std::string& what, double achieved)
        : Error(what + " (achieved " + std::to_string(achieved) + ")"),
          achieved_(achieved) {}
    double achieved() const { return achieved_; }

private:
    double achieved_;
};

// Two independently computed routes disagree beyond their stated tolerance.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

// Filesystem or allocation failure outside the caller's control.
class ResourceError : public Error {
public:
    using Error::Error;
};

}  // namespace cutout
