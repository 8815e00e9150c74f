#include "crmot/kvfile.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "crmot/errors.hpp"

namespace crmot {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::optional<std::string> KvSection::get(const std::string& key) const {
  for (const auto& e : entries)
    if (e.key == key) return e.value;
  return std::nullopt;
}

std::vector<const KvEntry*> KvSection::all(const std::string& key) const {
  std::vector<const KvEntry*> out;
  for (const auto& e : entries)
    if (e.key == key) out.push_back(&e);
  return out;
}

std::string KvSection::require(const std::string& key) const {
  auto v = get(key);
  if (!v) throw ConfigError("[" + name + "]: missing required key '" + key + "'");
  return *v;
}

double KvSection::require_double(const std::string& key) const {
  return parse_double(require(key), "[" + name + "] " + key);
}

double KvSection::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  return v ? parse_double(*v, "[" + name + "] " + key) : fallback;
}

int KvSection::require_int(const std::string& key) const {
  return static_cast<int>(parse_int(require(key), "[" + name + "] " + key));
}

long long KvSection::get_int(const std::string& key, long long fallback) const {
  auto v = get(key);
  return v ? parse_int(*v, "[" + name + "] " + key) : fallback;
}

bool KvSection::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  return v ? parse_bool(*v, "[" + name + "] " + key) : fallback;
}

std::string KvSection::get_string(const std::string& key, const std::string& fallback) const {
  auto v = get(key);
  return v ? *v : fallback;
}

void KvSection::expect_keys(std::initializer_list<const char*> allowed) const {
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& e : entries)
    if (!ok.count(e.key))
      throw ConfigError("[" + name + "] line " + std::to_string(e.line) +
                        ": unknown key '" + e.key + "'");
}

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

KvFile KvFile::parse_string(const std::string& text, const std::string& origin) {
  KvFile file;
  file.origin = origin;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  KvSection* current = nullptr;

  while (std::getline(in, raw)) {
    ++lineno;
    auto hash = raw.find('#');
    std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      for (const auto& s : file.sections)
        if (s.name == name)
          throw ConfigError(origin + ":" + std::to_string(lineno) +
                            ": duplicate section [" + name + "]");
      file.sections.push_back(KvSection{name, {}, lineno});
      current = &file.sections.back();
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
    if (!current)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside any section");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    current->entries.push_back(KvEntry{key, value, lineno});
  }
  return file;
}

const KvSection* KvFile::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

const KvSection& KvFile::require_section(const std::string& name) const {
  const KvSection* s = find(name);
  if (!s) throw ConfigError(origin + ": missing section [" + name + "]");
  return *s;
}

std::vector<const KvSection*> KvFile::with_prefix(const std::string& prefix) const {
  std::vector<const KvSection*> out;
  const std::string want = prefix + " ";
  for (const auto& s : sections)
    if (s.name.rfind(want, 0) == 0) out.push_back(&s);
  return out;
}

double parse_double(const std::string& text, const std::string& context) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE)
    throw ConfigError(context + ": not a number: '" + text + "'");
  return v;
}

long long parse_int(const std::string& text, const std::string& context) {
  long long v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size())
    throw ConfigError(context + ": not an integer: '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text, const std::string& context) {
  if (text == "true" || text == "on" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "off" || text == "no" || text == "0") return false;
  throw ConfigError(context + ": not a boolean: '" + text + "'");
}

std::string format_double_exact(double v) {
  // Try increasing precision until the text round-trips exactly.
  char buf[64];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace crmot
