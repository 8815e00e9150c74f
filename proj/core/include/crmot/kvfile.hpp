#pragma once

#include <optional>
#include <string>
#include <vector>

namespace crmot {

// Flat sectioned key-value text: '[section name]' headers, 'key = value'
// lines, '#' comments. No nesting. Keys may repeat within a section (used for
// list-like entries such as decay channels and schedule events); section names
// must be unique. Parsers report file and line on every complaint.

struct KvEntry {
  std::string key;
  std::string value;
  int line = 0;
};

struct KvSection {
  std::string name;
  std::vector<KvEntry> entries;
  int line = 0;

  // First value for key, if present.
  std::optional<std::string> get(const std::string& key) const;
  // All values for a repeated key, in file order.
  std::vector<const KvEntry*> all(const std::string& key) const;

  std::string require(const std::string& key) const;
  double require_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int require_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  // Rejects any key not in the allowed list.
  void expect_keys(std::initializer_list<const char*> allowed) const;
};

struct KvFile {
  std::string origin;  // path or synthetic name, used in error messages
  std::vector<KvSection> sections;

  static KvFile parse_file(const std::string& path);
  static KvFile parse_string(const std::string& text, const std::string& origin);

  const KvSection* find(const std::string& name) const;
  const KvSection& require_section(const std::string& name) const;
  // Sections whose name starts with "prefix " (prefix plus one space).
  std::vector<const KvSection*> with_prefix(const std::string& prefix) const;
};

// strtod with full-string validation; throws ConfigError naming the context.
double parse_double(const std::string& text, const std::string& context);
long long parse_int(const std::string& text, const std::string& context);
bool parse_bool(const std::string& text, const std::string& context);

// Shortest decimal text that parses back to exactly the same double.
std::string format_double_exact(double v);

}  // namespace crmot
