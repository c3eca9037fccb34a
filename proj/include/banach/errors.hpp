#pragma once

#include <stdexcept>
#include <string>

namespace banach {

/// Shape mismatch between objects that must agree (lengths, spaces, bundles).
class StructuralError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Broken internal invariant (e.g. an LP that should be feasible is not).
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Malformed configuration; `field` names the offending key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace banach
