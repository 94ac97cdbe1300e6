#pragma once

#include <stdexcept>
#include <string>

namespace koblitz {

/// Base class for every error raised by the library. `exit_code()` is the
/// process status the CLI reports for it.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual int exit_code() const noexcept { return 1; }
};

/// Invalid user input: malformed curve, bad flags, inconsistent levels.
class ConfigError : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 2; }
};

class DomainError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class UnknownSpec : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class InvalidDiscriminant : public ConfigError {
public:
    using ConfigError::ConfigError;
};

/// A group block is too large to enumerate under the configured cap.
class BudgetExceeded : public Error {
public:
    using Error::Error;
    int exit_code() const noexcept override { return 3; }
};

/// The curve has bad reduction at the requested prime.
class BadReduction : public Error {
public:
    BadReduction(unsigned long long p)
        : Error("bad reduction at p = " + std::to_string(p)), prime(p) {}
    unsigned long long prime;
};

}  // namespace koblitz
