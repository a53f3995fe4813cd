#pragma once

#include <string_view>

namespace divprune {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace divprune
