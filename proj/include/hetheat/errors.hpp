#pragma once

#include <stdexcept>
#include <string>

namespace hetheat {

/// Bad user input. Carries the name of the offending field.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& message)
        : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Argument outside the mathematical domain of a function (u <= 0, q < 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure failed. `module` and `op` identify where.
class NumericError : public std::runtime_error {
public:
    NumericError(std::string module, std::string op, const std::string& message)
        : std::runtime_error(module + "::" + op + ": " + message),
          module_(std::move(module)), op_(std::move(op)) {}

    const std::string& module() const noexcept { return module_; }
    const std::string& op() const noexcept { return op_; }

private:
    std::string module_;
    std::string op_;
};

class QuadratureError : public NumericError {
public:
    QuadratureError(const std::string& op, double estimate, double error_bound)
        : NumericError("covariance", op,
                       "quadrature did not converge (estimate " + std::to_string(estimate) +
                           ", error bound " + std::to_string(error_bound) + ")"),
          estimate_(estimate), error_bound_(error_bound) {}

    double estimate() const noexcept { return estimate_; }
    double error_bound() const noexcept { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

/// Gram matrix unusable for the requested statistic (nonpositive variance).
class InvalidGramError : public NumericError {
public:
    InvalidGramError(const std::string& module, const std::string& op, const std::string& message)
        : NumericError(module, op, message) {}
};

/// A file could not be read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hetheat
