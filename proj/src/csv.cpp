#include "tailgroups/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tailgroups/error.hpp"

namespace tailgroups {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string cell_ref(std::size_t line, std::size_t col) {
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

DataMatrix parse_csv(const std::string& text) {
  std::vector<std::string> lines;
  {
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ParseError("empty file: expected a header line", 1, 0);

  DataMatrix out;
  out.column_names = split(lines.front());
  const std::size_t d = out.column_names.size();
  for (std::size_t j = 0; j < d; ++j) {
    if (out.column_names[j].empty()) throw ParseError("empty column name at " + cell_ref(1, j + 1), 1, j + 1);
  }
  if (lines.size() < 3) {
    throw ParseError("fewer than 2 rows: found " + std::to_string(lines.size() - 1) + " data row(s)",
                     lines.size(), 0);
  }
  out.values.resize(static_cast<Eigen::Index>(lines.size() - 1), static_cast<Eigen::Index>(d));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::vector<std::string> cells = split(lines[i]);
    if (cells.size() != d) {
      throw ParseError("ragged row at line " + std::to_string(i + 1) + ": expected " + std::to_string(d) +
                           " cells, found " + std::to_string(cells.size()),
                       i + 1, 0);
    }
    for (std::size_t j = 0; j < d; ++j) {
      const std::string& c = cells[j];
      if (c.empty()) throw ParseError("blank cell at " + cell_ref(i + 1, j + 1), i + 1, j + 1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(v)) {
        throw ParseError("non-numeric cell '" + c + "' at " + cell_ref(i + 1, j + 1), i + 1, j + 1);
      }
      out.values(static_cast<Eigen::Index>(i - 1), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return out;
}

DataMatrix load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_csv(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.row(), e.col());
  }
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (j) out += ',';
      out += cells[j];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string to_csv(const DataMatrix& data) {
  CsvTable t;
  t.header = data.column_names.empty() ? default_column_names(data.cols()) : data.column_names;
  for (int i = 0; i < data.rows(); ++i) {
    std::vector<std::string> r;
    for (int j = 0; j < data.cols(); ++j) r.push_back(format_number(data.values(i, j)));
    t.rows.push_back(std::move(r));
  }
  return t.str();
}

void save_csv(const std::string& path, const DataMatrix& data) { write_text(path, to_csv(data)); }

}  // namespace tailgroups
