#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <string>
#include <vector>

namespace accessgraph {

/// Validator for the subset of JSON Schema used by the shipped schemas:
/// type, enum, const, required, properties, additionalProperties (boolean or
/// schema), items, minItems, maxItems, minimum, exclusiveMinimum and $ref to
/// "#/$defs/...". Returns one message per violation; empty means valid.
class SchemaValidator {
 public:
  explicit SchemaValidator(nlohmann::json schema) : root_(std::move(schema)) {}

  std::vector<std::string> validate(const nlohmann::json& instance) const {
    std::vector<std::string> errors;
    check(root_, instance, "$", errors);
    return errors;
  }

 private:
  static bool type_matches(const std::string& type, const nlohmann::json& v) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "boolean") return v.is_boolean();
    if (type == "null") return v.is_null();
    if (type == "integer") return v.is_number_integer();
    if (type == "number") return v.is_number();
    return false;
  }

  const nlohmann::json& resolve(const nlohmann::json& schema) const {
    if (auto it = schema.find("$ref"); it != schema.end()) {
      const std::string ref = it->get<std::string>();
      static constexpr std::string_view kPrefix = "#/$defs/";
      if (ref.rfind(kPrefix, 0) == 0) return root_.at("$defs").at(ref.substr(kPrefix.size()));
    }
    return schema;
  }

  void check(const nlohmann::json& raw_schema, const nlohmann::json& v, const std::string& path,
             std::vector<std::string>& errors) const {
    const nlohmann::json& schema = resolve(raw_schema);
    if (auto it = schema.find("type"); it != schema.end()) {
      bool ok = false;
      if (it->is_array()) {
        for (const auto& t : *it) ok = ok || type_matches(t.get<std::string>(), v);
      } else {
        ok = type_matches(it->get<std::string>(), v);
      }
      if (!ok) {
        errors.push_back(path + ": expected type " + it->dump());
        return;
      }
    }
    if (auto it = schema.find("enum"); it != schema.end()) {
      if (std::find(it->begin(), it->end(), v) == it->end()) errors.push_back(path + ": value not in enum");
    }
    if (auto it = schema.find("const"); it != schema.end() && *it != v) errors.push_back(path + ": expected " + it->dump());
    if (v.is_number()) {
      if (auto it = schema.find("minimum"); it != schema.end() && v.get<double>() < it->get<double>()) {
        errors.push_back(path + ": below minimum");
      }
      if (auto it = schema.find("exclusiveMinimum"); it != schema.end() && v.get<double>() <= it->get<double>()) {
        errors.push_back(path + ": not above exclusiveMinimum");
      }
    }
    if (v.is_object()) {
      if (auto it = schema.find("required"); it != schema.end()) {
        for (const auto& name : *it) {
          if (!v.contains(name.get<std::string>())) errors.push_back(path + ": missing '" + name.get<std::string>() + "'");
        }
      }
      const auto props = schema.find("properties");
      const auto additional = schema.find("additionalProperties");
      for (const auto& [key, value] : v.items()) {
        if (props != schema.end() && props->contains(key)) {
          check((*props)[key], value, path + "." + key, errors);
        } else if (additional != schema.end()) {
          if (additional->is_boolean()) {
            if (!additional->get<bool>()) errors.push_back(path + ": unexpected property '" + key + "'");
          } else {
            check(*additional, value, path + "." + key, errors);
          }
        }
      }
    }
    if (v.is_array()) {
      if (auto it = schema.find("minItems"); it != schema.end() && v.size() < it->get<std::size_t>()) {
        errors.push_back(path + ": too few items");
      }
      if (auto it = schema.find("maxItems"); it != schema.end() && v.size() > it->get<std::size_t>()) {
        errors.push_back(path + ": too many items");
      }
      if (auto it = schema.find("items"); it != schema.end()) {
        for (std::size_t k = 0; k < v.size(); ++k) check(*it, v[k], path + "[" + std::to_string(k) + "]", errors);
      }
    }
  }

  nlohmann::json root_;
};

} // namespace accessgraph
