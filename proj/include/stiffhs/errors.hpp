#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace stiffhs {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Valid input the operation does not handle (e.g. a non-radial sweep).
class Unsupported : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Nonlinear or linear solver failed to converge.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Invalid configuration; carries every violated constraint, not just the first.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(std::vector<std::string> failures);

    const std::vector<std::string>& failures() const noexcept { return failures_; }

private:
    std::vector<std::string> failures_;
};

/// The explicit scheme produced NaN or an undershoot below tolerance.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, std::string state_dump)
        : std::runtime_error(what), dump_(std::move(state_dump)) {}

    const std::string& state_dump() const noexcept { return dump_; }

private:
    std::string dump_;
};

} // namespace stiffhs
