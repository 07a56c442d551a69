#pragma once

// Minimal JSON-schema checker covering the subset the report schema uses:
// type / required / properties / items / enum / minimum / maximum.

#include <string>
#include <vector>

#include <json.hpp>

namespace testsupport {

inline bool type_matches(const nlohmann::json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "integer") return value.is_number_integer();
  if (type == "number") return value.is_number();
  if (type == "null") return value.is_null();
  return false;
}

inline void validate_schema(const nlohmann::json& value,
                            const nlohmann::json& schema,
                            const std::string& path,
                            std::vector<std::string>& errors) {
  if (schema.contains("type")) {
    const auto& t = schema["type"];
    bool ok = false;
    if (t.is_string()) {
      ok = type_matches(value, t.get<std::string>());
    } else {
      for (const auto& option : t) {
        if (type_matches(value, option.get<std::string>())) ok = true;
      }
    }
    if (!ok) errors.push_back(path + ": type mismatch");
  }
  if (schema.contains("enum")) {
    bool ok = false;
    for (const auto& option : schema["enum"]) {
      if (value == option) ok = true;
    }
    if (!ok) errors.push_back(path + ": not in enum");
  }
  if (value.is_number()) {
    if (schema.contains("minimum") &&
        value.get<double>() < schema["minimum"].get<double>()) {
      errors.push_back(path + ": below minimum");
    }
    if (schema.contains("maximum") &&
        value.get<double>() > schema["maximum"].get<double>()) {
      errors.push_back(path + ": above maximum");
    }
  }
  if (value.is_object()) {
    if (schema.contains("required")) {
      for (const auto& key : schema["required"]) {
        if (!value.contains(key.get<std::string>())) {
          errors.push_back(path + ": missing required key " +
                           key.get<std::string>());
        }
      }
    }
    if (schema.contains("properties")) {
      for (auto it = schema["properties"].begin();
           it != schema["properties"].end(); ++it) {
        if (value.contains(it.key())) {
          validate_schema(value[it.key()], it.value(), path + "/" + it.key(),
                          errors);
        }
      }
    }
  }
  if (value.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      validate_schema(value[i], schema["items"],
                      path + "[" + std::to_string(i) + "]", errors);
    }
  }
}

inline std::vector<std::string> schema_errors(const nlohmann::json& value,
                                              const nlohmann::json& schema) {
  std::vector<std::string> errors;
  validate_schema(value, schema, "", errors);
  return errors;
}

}  // namespace testsupport
