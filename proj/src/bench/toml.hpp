#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace srba::bench {

/// Minimal TOML subset: [table] headers, key = value lines with string,
/// integer, float, boolean and flat-array values, and # comments. Covers the
/// experiment-config schema; anything else is a parse error with a line
/// number.
struct TomlValue {
  std::variant<std::string, std::int64_t, double, bool,
               std::vector<TomlValue>>
      data;

  bool is_string() const { return std::holds_alternative<std::string>(data); }
  bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
  bool is_float() const { return std::holds_alternative<double>(data); }
  bool is_bool() const { return std::holds_alternative<bool>(data); }
  bool is_array() const {
    return std::holds_alternative<std::vector<TomlValue>>(data);
  }

  const std::string& as_string() const { return std::get<std::string>(data); }
  std::int64_t as_int() const { return std::get<std::int64_t>(data); }
  bool as_bool() const { return std::get<bool>(data); }
  const std::vector<TomlValue>& as_array() const {
    return std::get<std::vector<TomlValue>>(data);
  }
  /// Numeric accessor: accepts either an integer or a float token.
  double as_number() const {
    if (is_int()) return static_cast<double>(as_int());
    return std::get<double>(data);
  }
};

using TomlTable = std::map<std::string, TomlValue>;

/// Parsed document: tables by name; keys before any [table] header land in
/// the "" table.
struct TomlDocument {
  std::map<std::string, TomlTable> tables;

  bool has(const std::string& table, const std::string& key) const;
  const TomlValue& at(const std::string& table, const std::string& key) const;
};

TomlDocument parse_toml_text(const std::string& text,
                             const std::string& origin = "<string>");
TomlDocument parse_toml_file(const std::string& path);

}  // namespace srba::bench
