#pragma once

// Minimal JSON-Schema checker covering the subset the shipped schemas use:
// type (string or list), required, properties, items, enum, minItems,
// maxItems, minimum. Unknown keywords are ignored. Test-only.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace schema_check {

using Json = nlohmann::json;

inline bool type_matches(const Json& value, const std::string& type) {
    if (type == "object") return value.is_object();
    if (type == "array") return value.is_array();
    if (type == "string") return value.is_string();
    if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
    if (type == "number") return value.is_number();
    if (type == "boolean") return value.is_boolean();
    if (type == "null") return value.is_null();
    return false;
}

inline void validate(const Json& value, const Json& schema, const std::string& path, std::vector<std::string>& errors) {
    if (schema.contains("type")) {
        const Json& t = schema.at("type");
        bool ok = false;
        if (t.is_string()) {
            ok = type_matches(value, t.get<std::string>());
        } else {
            for (const auto& option : t)
                if (type_matches(value, option.get<std::string>())) ok = true;
        }
        if (!ok) {
            errors.push_back(path + ": type mismatch (got " + std::string(value.type_name()) + ")");
            return;
        }
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& option : schema.at("enum"))
            if (value == option) ok = true;
        if (!ok) errors.push_back(path + ": value not in enum");
    }
    if (value.is_number() && schema.contains("minimum") && value.get<double>() < schema.at("minimum").get<double>())
        errors.push_back(path + ": below minimum");
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const auto& key : schema.at("required"))
                if (!value.contains(key.get<std::string>()))
                    errors.push_back(path + ": missing required key '" + key.get<std::string>() + "'");
        if (schema.contains("properties"))
            for (const auto& [key, sub] : schema.at("properties").items())
                if (value.contains(key)) validate(value.at(key), sub, path + "." + key, errors);
    }
    if (value.is_array()) {
        if (schema.contains("minItems") && value.size() < schema.at("minItems").get<size_t>())
            errors.push_back(path + ": too few items");
        if (schema.contains("maxItems") && value.size() > schema.at("maxItems").get<size_t>())
            errors.push_back(path + ": too many items");
        if (schema.contains("items")) {
            size_t i = 0;
            for (const auto& item : value) validate(item, schema.at("items"), path + "[" + std::to_string(i++) + "]", errors);
        }
    }
}

inline std::vector<std::string> validate_against_file(const Json& value, const std::string& schema_path) {
    std::ifstream in(schema_path);
    if (!in) return {"cannot open schema file: " + schema_path};
    Json schema = Json::parse(in);
    std::vector<std::string> errors;
    validate(value, schema, "$", errors);
    return errors;
}

}  // namespace schema_check
