#pragma once

#include <iosfwd>

#include "divprune/errors.hpp"

namespace divprune::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitLimit = 3;

/// 1 for bad arguments or budgets, 2 for input data and model-range problems,
/// 3 for computational limits.
int exit_code_for(ErrorKind kind) noexcept;

/// Entry point of the `divprune` tool. JSON goes to `out` when no --output is given,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace divprune::cli
