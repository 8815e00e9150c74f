#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crmot {

// Column-oriented CSV with '#' comment lines before or after the header.
// Numeric cells are written as %.8e so outputs are reproducible bit-for-bit
// across runs with the same seed.

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  void comment(const std::string& text);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<double>& values);
  // Preformatted cells, for label columns in fit summaries.
  void row_text(const std::vector<std::string>& cells);

  static std::string format(double v);

 private:
  std::ostream& os_;
  size_t ncols_ = 0;
};

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // row-major

  size_t ncols() const { return columns.size(); }
  size_t nrows() const { return rows.size(); }
  // Throws ConfigError if the column is missing.
  std::vector<double> column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

// Reader accepts only numeric data cells; used for fit input files.
CsvTable read_numeric_csv(std::istream& is, const std::string& origin);
CsvTable read_numeric_csv_file(const std::string& path);

}  // namespace crmot
