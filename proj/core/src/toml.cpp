#include "photosplat/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "photosplat/common.hpp"

namespace photosplat {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Cuts a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

double parse_number(const std::string& text, int line_no) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  require(end != begin && trim(std::string(end)) == "",
          "toml line ", line_no, ": bad number '", text, "'");
  return v;
}

TomlValue parse_value(const std::string& raw, int line_no) {
  TomlValue v;
  const std::string text = trim(raw);
  require(!text.empty(), "toml line ", line_no, ": empty value");
  if (text.front() == '"') {
    require(text.size() >= 2 && text.back() == '"', "toml line ", line_no,
            ": unterminated string");
    v.kind = TomlValue::Kind::String;
    v.string = text.substr(1, text.size() - 2);
    return v;
  }
  if (text == "true" || text == "false") {
    v.kind = TomlValue::Kind::Bool;
    v.boolean = (text == "true");
    return v;
  }
  if (text.front() == '[') {
    require(text.back() == ']', "toml line ", line_no,
            ": unterminated array");
    v.kind = TomlValue::Kind::NumberList;
    std::string inner = text.substr(1, text.size() - 2);
    std::stringstream ss(inner);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      v.list.push_back(parse_number(item, line_no));
    }
    return v;
  }
  v.kind = TomlValue::Kind::Number;
  v.number = parse_number(text, line_no);
  return v;
}

}  // namespace

TomlDocument toml_parse(const std::string& text) {
  TomlDocument doc;
  std::string prefix;
  std::map<std::string, TomlValue>* array_table = nullptr;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.rfind("[[", 0) == 0) {
      require(line.size() >= 4 && line.substr(line.size() - 2) == "]]",
              "toml line ", line_no, ": malformed table-array header");
      const std::string name = trim(line.substr(2, line.size() - 4));
      require(!name.empty(), "toml line ", line_no, ": empty table name");
      doc.table_arrays[name].emplace_back();
      array_table = &doc.table_arrays[name].back();
      prefix.clear();
      continue;
    }
    if (line.front() == '[') {
      require(line.back() == ']', "toml line ", line_no,
              ": malformed section header");
      prefix = trim(line.substr(1, line.size() - 2));
      require(!prefix.empty(), "toml line ", line_no, ": empty section name");
      array_table = nullptr;
      continue;
    }
    const std::size_t eq = line.find('=');
    require(eq != std::string::npos, "toml line ", line_no,
            ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    require(!key.empty(), "toml line ", line_no, ": empty key");
    TomlValue value = parse_value(line.substr(eq + 1), line_no);
    if (array_table) {
      (*array_table)[key] = std::move(value);
    } else {
      const std::string full = prefix.empty() ? key : prefix + "." + key;
      doc.values[full] = std::move(value);
    }
  }
  return doc;
}

TomlDocument toml_parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "cannot open config file: ", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return toml_parse(ss.str());
}

bool TomlDocument::has(const std::string& key) const {
  return values.count(key) > 0;
}

const TomlValue& TomlDocument::fetch(const std::string& key,
                                     TomlValue::Kind kind) const {
  auto it = values.find(key);
  require(it != values.end(), "config: missing key '", key, "'");
  require(it->second.kind == kind, "config: key '", key,
          "' has the wrong type");
  return it->second;
}

double TomlDocument::number(const std::string& key) const {
  return fetch(key, TomlValue::Kind::Number).number;
}

double TomlDocument::number_or(const std::string& key,
                               double fallback) const {
  return has(key) ? number(key) : fallback;
}

long TomlDocument::integer(const std::string& key) const {
  const double v = number(key);
  const long n = static_cast<long>(v);
  require(static_cast<double>(n) == v, "config: key '", key,
          "' must be an integer, got ", v);
  return n;
}

long TomlDocument::integer_or(const std::string& key, long fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool TomlDocument::boolean_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  return fetch(key, TomlValue::Kind::Bool).boolean;
}

std::string TomlDocument::string_or(const std::string& key,
                                    const std::string& fallback) const {
  if (!has(key)) return fallback;
  return fetch(key, TomlValue::Kind::String).string;
}

std::vector<double> TomlDocument::list_or(const std::string& key,
                                          std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  return fetch(key, TomlValue::Kind::NumberList).list;
}

const std::vector<std::map<std::string, TomlValue>>&
TomlDocument::table_array(const std::string& name) const {
  static const std::vector<std::map<std::string, TomlValue>> empty;
  auto it = table_arrays.find(name);
  return it == table_arrays.end() ? empty : it->second;
}

double toml_entry_number(const std::map<std::string, TomlValue>& table,
                         const std::string& key) {
  auto it = table.find(key);
  require(it != table.end() && it->second.kind == TomlValue::Kind::Number,
          "config: table entry '", key, "' missing or not a number");
  return it->second.number;
}

std::vector<double> toml_entry_list(
    const std::map<std::string, TomlValue>& table, const std::string& key) {
  auto it = table.find(key);
  require(it != table.end() && it->second.kind == TomlValue::Kind::NumberList,
          "config: table entry '", key, "' missing or not an array");
  return it->second.list;
}

}  // namespace photosplat
