#pragma once

#include <stdexcept>
#include <string>

namespace vsm {

/// Precondition or range violation on an input parameter.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Failure inside a numerical stage (factorization, solve, integration).
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// The bordered system could not be solved to the requested tolerance.
class IllConditionedError : public NumericalError {
public:
    IllConditionedError(const std::string& what, double residual, double condition)
        : NumericalError("linearized-solver", what), residual_(residual), condition_(condition) {}

    double residual() const noexcept { return residual_; }
    double condition() const noexcept { return condition_; }

private:
    double residual_;
    double condition_;
};

/// Invalid or malformed configuration; carries the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

}  // namespace vsm
