#pragma once

#include <stdexcept>
#include <string>

namespace mcde {

/// Base class for all library errors. `kind()` is a stable machine-readable tag
/// used by the CLI when reporting failures as JSON.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Parameter outside the family's domain (e.g. Clayton theta <= 0).
struct ParameterDomainError : Error {
    explicit ParameterDomainError(const std::string& w) : Error("parameter_domain", w) {}
};

/// Malformed input data: NaN coordinates, degenerate columns, bad shapes.
struct InputError : Error {
    explicit InputError(const std::string& w) : Error("input", w) {}
};

/// Evaluation at a point where the copula vanishes and a log/negative power is required.
struct BoundaryError : Error {
    explicit BoundaryError(const std::string& w) : Error("boundary", w) {}
};

/// The (family, dimension, operation) combination is not implemented.
struct UnsupportedOperation : Error {
    explicit UnsupportedOperation(const std::string& w) : Error("unsupported_operation", w) {}
};

/// API misuse, such as a missing gamma weight.
struct UsageError : Error {
    explicit UsageError(const std::string& w) : Error("usage", w) {}
};

/// Numerical failure (singular matrices, non-finite intermediate results).
struct NumericalError : Error {
    explicit NumericalError(const std::string& w) : Error("numerical", w) {}
};

/// Invalid configuration of a procedure (cross-validation folds, scenarios).
struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error("config", w) {}
};

}  // namespace mcde
