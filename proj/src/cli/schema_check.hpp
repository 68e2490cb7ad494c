#pragma once

#include <string>

#include "json.hpp"

namespace ssldyn::cli {

/// Structural validation against the JSON-Schema subset used by the shipped
/// schemas: type, properties, required, items, enum, additionalProperties.
/// Returns an empty string on success, else the first violation found.
std::string schema_violation(const nlohmann::json& schema,
                             const nlohmann::json& value,
                             const std::string& path = "$");

}  // namespace ssldyn::cli
