#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace divprune {

enum class ErrorKind {
    MalformedHeader,
    NonFiniteValue,
    DimensionError,
    IoError,
    ZeroNormVector,
    NonPositiveFactor,
    MatrixTooLarge,
    IndexOutOfRange,
    DuplicateIndex,
    InvalidBudget,
    BudgetTooLarge,
    EmptyInput,
    CombinatorialLimitExceeded,
    NonPositiveDimension,
    InvalidConfig,
    ModelOutOfRange,
    NonFiniteObjective,
};

/// Name of the error class as exposed to users (CLI messages, bindings).
std::string_view error_name(ErrorKind kind) noexcept;

/// Every library failure is reported through this type; `kind()` identifies the class.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept { return error_name(kind_); }
    /// Message without the leading class name.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorKind kind_;
    std::string message_;
};

}  // namespace divprune
