#include "gaminet/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "gaminet/errors.hpp"

namespace gaminet {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
    if (c == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

std::string parse_quoted(const std::string& raw, const std::string& where) {
  if (raw.size() < 2 || raw.back() != '"')
    throw ValidationError(where + ": unterminated string: " + raw);
  std::string out;
  for (size_t i = 1; i + 1 < raw.size(); ++i) {
    char c = raw[i];
    if (c == '\\' && i + 2 < raw.size()) {
      char n = raw[++i];
      switch (n) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: out.push_back(n); break;
      }
    } else {
      out.push_back(c);
    }
  }
  return out;
}

bool looks_like_int(const std::string& s) {
  if (s.empty()) return false;
  size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

std::vector<std::string> split_array_items(const std::string& inner, const std::string& where) {
  std::vector<std::string> items;
  std::string cur;
  bool in_str = false;
  for (size_t i = 0; i < inner.size(); ++i) {
    char c = inner[i];
    if (c == '"' && (i == 0 || inner[i - 1] != '\\')) in_str = !in_str;
    if (c == ',' && !in_str) {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (in_str) throw ValidationError(where + ": unterminated string in array");
  std::string last = trim(cur);
  if (!last.empty()) items.push_back(last);
  return items;
}

TomlTable::Value parse_value(const std::string& raw, const std::string& where) {
  if (raw.empty()) throw ValidationError(where + ": missing value");
  if (raw.front() == '"') return parse_quoted(raw, where);
  if (raw == "true") return true;
  if (raw == "false") return false;
  if (raw.front() == '[') {
    if (raw.back() != ']') throw ValidationError(where + ": unterminated array");
    auto items = split_array_items(raw.substr(1, raw.size() - 2), where);
    if (items.empty()) return std::vector<std::string>{};
    if (items.front().front() == '"') {
      std::vector<std::string> out;
      for (auto& it : items) out.push_back(parse_quoted(it, where));
      return out;
    }
    std::vector<long long> out;
    for (auto& it : items) {
      if (!looks_like_int(it))
        throw ValidationError(where + ": array item is not an integer: " + it);
      out.push_back(std::stoll(it));
    }
    return out;
  }
  if (looks_like_int(raw)) return static_cast<long long>(std::stoll(raw));
  try {
    size_t used = 0;
    double d = std::stod(raw, &used);
    if (used == raw.size()) return d;
  } catch (const std::exception&) {
  }
  throw ValidationError(where + ": cannot parse value: " + raw);
}

}  // namespace

TomlTable TomlTable::parse(const std::string& text, const std::string& origin) {
  TomlTable table;
  table.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (body.front() == '[')
      throw ValidationError(where + ": tables are not supported; use flat keys");
    size_t eq = body.find('=');
    if (eq == std::string::npos)
      throw ValidationError(where + ": expected `key = value`");
    std::string key = trim(body.substr(0, eq));
    std::string val = trim(body.substr(eq + 1));
    if (key.empty()) throw ValidationError(where + ": empty key");
    if (table.values_.count(key))
      throw ValidationError(where + ": duplicate key: " + key);
    table.values_[key] = parse_value(val, where);
  }
  return table;
}

TomlTable TomlTable::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

std::vector<std::string> TomlTable::keys() const {
  std::vector<std::string> out;
  for (auto& [k, v] : values_) out.push_back(k);
  return out;
}

const TomlTable::Value* TomlTable::find(const std::string& key) const {
  auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

void TomlTable::type_error(const std::string& key, const std::string& want) const {
  throw ValidationError(origin_ + ": key `" + key + "` is not " + want);
}

std::string TomlTable::get_string(const std::string& key) const {
  const Value* v = find(key);
  if (!v) throw ValidationError(origin_ + ": missing required key `" + key + "`");
  if (auto* s = std::get_if<std::string>(v)) return *s;
  type_error(key, "a string");
}

std::string TomlTable::get_string(const std::string& key, const std::string& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (auto* s = std::get_if<std::string>(v)) return *s;
  type_error(key, "a string");
}

long long TomlTable::get_int(const std::string& key, long long fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (auto* i = std::get_if<long long>(v)) return *i;
  type_error(key, "an integer");
}

double TomlTable::get_double(const std::string& key, double fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (auto* d = std::get_if<double>(v)) return *d;
  if (auto* i = std::get_if<long long>(v)) return static_cast<double>(*i);
  type_error(key, "a number");
}

bool TomlTable::get_bool(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (auto* b = std::get_if<bool>(v)) return *b;
  type_error(key, "a boolean");
}

std::vector<std::string> TomlTable::get_string_array(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return {};
  if (auto* a = std::get_if<std::vector<std::string>>(v)) return *a;
  if (auto* s = std::get_if<std::string>(v)) return {*s};
  type_error(key, "an array of strings");
}

std::vector<long long> TomlTable::get_int_array(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return {};
  if (auto* a = std::get_if<std::vector<long long>>(v)) return *a;
  if (auto* i = std::get_if<long long>(v)) return {*i};
  type_error(key, "an array of integers");
}

}  // namespace gaminet
