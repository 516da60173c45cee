#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

namespace fbst {

/// Plain-ASCII CSV builder: comma separated, '.' decimal separator regardless
/// of the global locale, every row newline-terminated.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const std::vector<double>& values);
  /// Row of preformatted cells (caller guarantees no embedded commas).
  void add_text_row(const std::vector<std::string>& cells);

  std::size_t row_count() const noexcept { return rows_.size(); }
  std::string header_line() const;
  std::string to_string() const;

  /// Writes header plus rows atomically, replacing any existing file.
  void write(const std::filesystem::path& path) const;
  /// Appends rows to `path`, emitting the header only if the file is new or empty.
  void append(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> rows_;
};

/// Formats a double with round-trip precision in the C locale.
std::string format_number(double value);

}  // namespace fbst
