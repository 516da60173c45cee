#include "fbst/csv.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <locale>
#include <sstream>

#include "fbst/errors.hpp"
#include "fbst/pgm.hpp"

namespace fbst {

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  std::ostringstream out;
  out.imbue(std::locale::classic());
  out.precision(std::numeric_limits<double>::max_digits10);
  out << value;
  return out.str();
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  add_text_row(cells);
}

void CsvTable::add_text_row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) {
    throw ShapeError("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                     std::to_string(header_.size()));
  }
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  rows_.push_back(std::move(line));
}

std::string CsvTable::header_line() const {
  std::string line;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) line += ',';
    line += header_[i];
  }
  return line;
}

std::string CsvTable::to_string() const {
  std::string out = header_line() + '\n';
  for (const auto& row : rows_) out += row + '\n';
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_file_atomic(path, to_string()); }

void CsvTable::append(const std::filesystem::path& path) const {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for appending");
  }
  if (fresh) out << header_line() << '\n';
  for (const auto& row : rows_) out << row << '\n';
  if (!out) {
    throw IoError("append failed: " + path.string());
  }
}

}  // namespace fbst
