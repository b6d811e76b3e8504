#pragma once

#include <stdexcept>
#include <string>

namespace wlancap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value violates a type invariant (bad timing component, r <= 1, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of an operation (k > n, tau > 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A fixed point or root the caller asked for does not exist.
class NoRootError : public Error {
public:
    using Error::Error;
};

/// Malformed scenario document. `field()` names the offending key path.
class ScenarioError : public Error {
public:
    ScenarioError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace wlancap
