#pragma once

#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

namespace cosim {

/// Attribute value of a system configuration object.
using scalar = std::variant<double, bool, std::string>;

std::optional<double> as_number(const scalar& s);
std::string to_string(const scalar& s);

nlohmann::json to_json(const scalar& s);
/// Throws schema_error when `j` is not a number, boolean or string.
scalar scalar_from_json(const nlohmann::json& j, const std::string& path);

} // namespace cosim
