#include "crmot/csv.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "crmot/errors.hpp"
#include "crmot/kvfile.hpp"

namespace crmot {

void CsvWriter::comment(const std::string& text) { os_ << "# " << text << "\n"; }

void CsvWriter::header(const std::vector<std::string>& names) {
  if (names.empty()) throw ConfigError("csv header needs at least one column");
  ncols_ = names.size();
  for (size_t i = 0; i < names.size(); ++i)
    os_ << (i ? "," : "") << names[i];
  os_ << "\n";
}

void CsvWriter::row(const std::vector<double>& values) {
  if (ncols_ && values.size() != ncols_)
    throw ConfigError("csv row width does not match the header");
  for (size_t i = 0; i < values.size(); ++i)
    os_ << (i ? "," : "") << format(values[i]);
  os_ << "\n";
}

void CsvWriter::row_text(const std::vector<std::string>& cells) {
  if (ncols_ && cells.size() != ncols_)
    throw ConfigError("csv row width does not match the header");
  for (size_t i = 0; i < cells.size(); ++i)
    os_ << (i ? "," : "") << cells[i];
  os_ << "\n";
}

std::string CsvWriter::format(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.8e", v);
  return buf;
}

std::vector<double> CsvTable::column(const std::string& name) const {
  for (size_t j = 0; j < columns.size(); ++j)
    if (columns[j] == name) {
      std::vector<double> out;
      out.reserve(rows.size());
      for (const auto& r : rows) out.push_back(r[j]);
      return out;
    }
  throw ConfigError("csv has no column '" + name + "'");
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& c : columns)
    if (c == name) return true;
  return false;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_cells(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

}  // namespace

CsvTable read_numeric_csv(std::istream& is, const std::string& origin) {
  CsvTable table;
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const std::vector<std::string> cells = split_cells(s);
    if (!have_header) {
      table.columns = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != table.columns.size())
      throw ConfigError(origin + ":" + std::to_string(lineno) +
                        ": expected " + std::to_string(table.columns.size()) +
                        " cells, got " + std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (size_t j = 0; j < cells.size(); ++j)
      row.push_back(parse_double(cells[j], origin + ":" +
                                               std::to_string(lineno) +
                                               " column " + table.columns[j]));
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw ConfigError(origin + ": no header row found");
  return table;
}

CsvTable read_numeric_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return read_numeric_csv(in, path);
}

}  // namespace crmot
