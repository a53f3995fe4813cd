#include "divprune/errors.hpp"

namespace divprune {

std::string_view error_name(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::MalformedHeader: return "MalformedHeader";
        case ErrorKind::NonFiniteValue: return "NonFiniteValue";
        case ErrorKind::DimensionError: return "DimensionError";
        case ErrorKind::IoError: return "IoError";
        case ErrorKind::ZeroNormVector: return "ZeroNormVector";
        case ErrorKind::NonPositiveFactor: return "NonPositiveFactor";
        case ErrorKind::MatrixTooLarge: return "MatrixTooLarge";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::DuplicateIndex: return "DuplicateIndex";
        case ErrorKind::InvalidBudget: return "InvalidBudget";
        case ErrorKind::BudgetTooLarge: return "BudgetTooLarge";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::CombinatorialLimitExceeded: return "CombinatorialLimitExceeded";
        case ErrorKind::NonPositiveDimension: return "NonPositiveDimension";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::ModelOutOfRange: return "ModelOutOfRange";
        case ErrorKind::NonFiniteObjective: return "NonFiniteObjective";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(error_name(kind)) + ": " + message), kind_(kind), message_(message) {}

}  // namespace divprune
