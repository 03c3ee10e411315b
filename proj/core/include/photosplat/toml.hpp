#pragma once

#include <map>
#include <string>
#include <vector>

namespace photosplat {

// Small TOML subset: comments, [section] headers, [[array-of-tables]],
// values of kind string, bool, number, or flat number array. Sections
// flatten into dotted keys ("vignette.a2").
struct TomlValue {
  enum class Kind { Number, Bool, String, NumberList };
  Kind kind = Kind::Number;
  double number = 0.0;
  bool boolean = false;
  std::string string;
  std::vector<double> list;
};

class TomlDocument {
 public:
  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer_or(const std::string& key, long fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::string string_or(const std::string& key,
                        const std::string& fallback) const;
  std::vector<double> list_or(const std::string& key,
                              std::vector<double> fallback) const;

  const std::vector<std::map<std::string, TomlValue>>& table_array(
      const std::string& name) const;

  std::map<std::string, TomlValue> values;
  std::map<std::string, std::vector<std::map<std::string, TomlValue>>>
      table_arrays;

 private:
  const TomlValue& fetch(const std::string& key, TomlValue::Kind kind) const;
};

TomlDocument toml_parse(const std::string& text);
TomlDocument toml_parse_file(const std::string& path);

double toml_entry_number(const std::map<std::string, TomlValue>& table,
                         const std::string& key);
std::vector<double> toml_entry_list(
    const std::map<std::string, TomlValue>& table, const std::string& key);

}  // namespace photosplat
