#pragma once

#include <string>
#include <vector>

#include "tailgroups/transform.hpp"

namespace tailgroups {

/// Reads a comma-separated file whose first line names the columns. Every
/// other line must hold the same number of finite numbers. Blank lines at the
/// end are ignored.
///
/// Throws IoError when the file cannot be read and ParseError (with 1-based
/// line and column) for ragged rows, blank or non-numeric cells, and files
/// with fewer than 2 data rows.
DataMatrix load_csv(const std::string& path);

/// Same rules, from text already in memory.
DataMatrix parse_csv(const std::string& text);

/// 17 significant digits, so values round-trip exactly.
std::string format_number(double v);

/// Rows of preformatted cells under a header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const;
};

void write_text(const std::string& path, const std::string& content);

/// Writes the matrix with its column names (X1.. when none).
void save_csv(const std::string& path, const DataMatrix& data);
std::string to_csv(const DataMatrix& data);

}  // namespace tailgroups
