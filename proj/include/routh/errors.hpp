#pragma once
/// @file errors.hpp
/// @brief Exception hierarchy. The CLI maps these to exit codes.

#include <stdexcept>
#include <string>
#include <vector>

namespace routh {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mismatched models, dimensions or arities.
struct StructuralError : Error { using Error::Error; };

/// Invalid user or scenario input (exit code 2).
struct ConfigurationError : Error { using Error::Error; };

/// Point outside the single chart.
struct DomainError : Error { using Error::Error; };

/// Non-finite values or unsupported differentiation depth (exit code 3).
struct NumericError : Error {
    NumericError(const std::string& what, std::vector<double> point = {}, double time = 0.0)
        : Error(what), point(std::move(point)), time(time) {}
    std::vector<double> point;
    double time;
};

struct ConvergenceError : NumericError {
    ConvergenceError(const std::string& what, double residual)
        : NumericError(what), residual(residual) {}
    double residual;
};

/// Singular Jacobian or linear system.
struct RankError : NumericError { using NumericError::NumericError; };

/// Singular Hessian in v or singular fiber block of the magnetic form.
struct HyperregularityError : NumericError {
    HyperregularityError(const std::string& what, std::string block)
        : NumericError(what), block(std::move(block)) {}
    std::string block;
};

/// Momentum shift cannot be solved (J restricted to a fiber not invertible).
struct GRegularityError : NumericError { using NumericError::NumericError; };

/// A sampled identity that should hold does not (e.g. m-dependence of a cocycle).
struct ConsistencyError : Error { using Error::Error; };

}  // namespace routh
