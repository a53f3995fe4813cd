#pragma once

#include <nlohmann/json.hpp>
#include <string>

namespace divprune {

using ordered_json = nlohmann::ordered_json;

/// Serializes with keys in insertion order and every floating-point value printed with
/// 17 significant digits. Non-finite numbers become null.
std::string dump_json(const ordered_json& value, int indent = 2);

/// +inf for null, otherwise the numeric value.
double number_or_infinity(const ordered_json& value);

}  // namespace divprune
