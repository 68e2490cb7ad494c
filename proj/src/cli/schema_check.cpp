#include "cli/schema_check.hpp"

namespace ssldyn::cli {

using nlohmann::json;

namespace {

bool type_matches(const std::string& type, const json& v) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "number") return v.is_number();
  if (type == "integer") return v.is_number_integer();
  if (type == "boolean") return v.is_boolean();
  if (type == "null") return v.is_null();
  return false;
}

}  // namespace

std::string schema_violation(const json& schema, const json& value,
                             const std::string& path) {
  if (schema.contains("type")) {
    const std::string type = schema["type"].get<std::string>();
    if (!type_matches(type, value))
      return path + ": expected " + type + ", got " + value.type_name();
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& option : schema["enum"])
      if (option == value) {
        ok = true;
        break;
      }
    if (!ok) return path + ": value not in enum";
  }
  if (value.is_object()) {
    if (schema.contains("required"))
      for (const auto& req : schema["required"])
        if (!value.contains(req.get<std::string>()))
          return path + ": missing required '" + req.get<std::string>() + "'";
    const json props =
        schema.contains("properties") ? schema["properties"] : json::object();
    for (const auto& [key, sub] : value.items()) {
      if (props.contains(key)) {
        const std::string err =
            schema_violation(props[key], sub, path + "." + key);
        if (!err.empty()) return err;
      } else if (schema.contains("additionalProperties") &&
                 schema["additionalProperties"].is_boolean() &&
                 !schema["additionalProperties"].get<bool>()) {
        return path + ": additional property '" + key + "' not allowed";
      }
    }
  }
  if (value.is_array() && schema.contains("items")) {
    for (size_t i = 0; i < value.size(); ++i) {
      const std::string err = schema_violation(
          schema["items"], value[i], path + "[" + std::to_string(i) + "]");
      if (!err.empty()) return err;
    }
  }
  return {};
}

}  // namespace ssldyn::cli
