#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace gaminet {

// Flat TOML subset used for config and schema files: `key = value` lines,
// `#` comments, and values that are strings, integers, floats, booleans or
// homogeneous arrays of strings/integers. No tables, no multi-line values.
class TomlTable {
 public:
  using Value = std::variant<std::string, long long, double, bool,
                             std::vector<std::string>, std::vector<long long>>;

  static TomlTable parse(const std::string& text, const std::string& origin = "<string>");
  static TomlTable parse_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::vector<std::string> keys() const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_string_array(const std::string& key) const;
  std::vector<long long> get_int_array(const std::string& key) const;

 private:
  const Value* find(const std::string& key) const;
  [[noreturn]] void type_error(const std::string& key, const std::string& want) const;

  std::string origin_;
  std::map<std::string, Value> values_;
};

}  // namespace gaminet
